use num_complex::Complex64;
use proptest::prelude::*;
use scatter1d::jost::{picard_differences, solve_m, wronskian_at, JostColumn, JostOptions, Side};
use scatter1d::oracles::PoschlTeller;
use scatter1d::{Grid, SampledPotential};

fn bumps(grid: Grid<f64>, params: &[(f64, f64, f64)]) -> SampledPotential<f64> {
    SampledPotential::from_fn(grid, |x| params.iter().map(|(a, c, w)| a * (-(x - c).powi(2) / w).exp()).sum()).unwrap()
}

fn bump_params() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.5f64..1.5, -3.0f64..3.0, 0.5f64..2.0), 1..4)
}

fn small_grid() -> Grid<f64> {
    Grid::new(-20.0, 20.0, 1025).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wronskian_is_independent_of_x(params in bump_params(), lambda in 0.2f64..6.0) {
        let v = bumps(small_grid(), &params);
        let col = JostColumn::solve(&v, Complex64::new(lambda, 0.0), &JostOptions::default()).unwrap();
        let w0 = col.wronskian(&v.grid);
        for i in (0..v.grid.n).step_by(31) {
            prop_assert!((col.wronskian_at(i) - w0).norm() < 1e-7 * w0.norm(), "x = {}", v.grid.x(i));
        }
        // the partial-march evaluation agrees with the full columns
        prop_assert!((wronskian_at(&v, Complex64::new(lambda, 0.0)) - w0).norm() < 1e-8 * w0.norm());
    }

    #[test]
    fn m_is_normalized_at_its_own_end(params in bump_params(), lambda in -6.0f64..6.0) {
        let v = bumps(small_grid(), &params);
        let z = Complex64::new(lambda, 0.0);
        let (mp, dmp) = solve_m(&v, z, Side::Plus, &JostOptions::default()).unwrap();
        let (mm, dmm) = solve_m(&v, z, Side::Minus, &JostOptions::default()).unwrap();
        let n = v.grid.n;
        // V is below 1e-30 within a few units of the ends
        prop_assert!((mp[n - 1] - 1.0).norm() < 1e-12 && dmp[n - 1].norm() < 1e-12);
        prop_assert!((mm[0] - 1.0).norm() < 1e-12 && dmm[0].norm() < 1e-12);
        prop_assert!((mp[n - 40] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn symmetric_potentials_mirror_m(params in bump_params(), lambda in 0.1f64..6.0) {
        let g = small_grid();
        let mirrored: Vec<(f64, f64, f64)> = params.iter().flat_map(|&(a, c, w)| [(a, c, w), (a, -c, w)]).collect();
        let v = bumps(g, &mirrored);
        let col = JostColumn::solve(&v, Complex64::new(lambda, 0.0), &JostOptions::default()).unwrap();
        let n = g.n;
        for i in 0..n {
            prop_assert!((col.m_minus[i] - col.m_plus[n - 1 - i]).norm() < 1e-10);
        }
    }

    #[test]
    fn poschl_teller_closed_form_at_random_points(lambda in -8.0f64..8.0, x in -15.0f64..15.0) {
        let v = SampledPotential::poschl_teller(Grid::new(-20.0, 20.0, 2049).unwrap(), 1.0);
        let z = Complex64::new(lambda, 0.0);
        let col = JostColumn::solve(&v, z, &JostOptions::default()).unwrap();
        let i = v.grid.nearest(x);
        let xi = v.grid.x(i);
        let o = PoschlTeller;
        prop_assert!((col.m_plus[i] - o.m_plus(z, xi)).norm() < 1e-5);
        prop_assert!((col.m_minus[i] - o.m_minus(z, xi)).norm() < 1e-5);
        prop_assert!((col.dm_minus[i] - o.dm_minus(z, xi)).norm() < 1e-5);
    }

    #[test]
    fn picard_differences_obey_factorial_majorant(params in bump_params(), lambda in -4.0f64..4.0) {
        let v = bumps(Grid::new(-8.0, 8.0, 401).unwrap(), &params);
        let gamma = v.gamma_fn()[0];
        let d = picard_differences(&v, Complex64::new(lambda, 0.0), Side::Plus, 14);
        let mut bound = 1.0;
        for (k, dk) in d.iter().enumerate() {
            bound *= gamma / (k + 1) as f64;
            prop_assert!(*dk <= bound * 1.02 + 1e-13, "iterate {k}: {dk} > {bound}");
        }
    }
}

#[test]
fn single_precision_poschl_teller() {
    let v = SampledPotential::<f32>::poschl_teller(Grid::new(-12.0f32, 12.0, 513).unwrap(), 1.0);
    let z = num_complex::Complex32::new(1.3, 0.0);
    let col = JostColumn::solve(&v, z, &JostOptions::default()).unwrap();
    let o = PoschlTeller;
    let err = (0..v.grid.n).fold(0.0f64, |e, i| {
        let exact = o.m_plus(Complex64::new(1.3, 0.0), v.grid.x(i) as f64);
        let got = Complex64::new(col.m_plus[i].re as f64, col.m_plus[i].im as f64);
        e.max((got - exact).norm())
    });
    assert!(err < 1e-3, "{err}");
    let w = col.wronskian(&v.grid);
    let exact = o.wronskian(Complex64::new(1.3, 0.0));
    assert!((Complex64::new(w.re as f64, w.im as f64) - exact).norm() < 1e-3);
}
