use num_complex::Complex64;
use proptest::prelude::*;
use scatter1d::jost::wronskian_at;
use scatter1d::oracles::{free_gaussian, PoschlTeller};
use scatter1d::propagator::crank_nicolson;
use scatter1d::waveop::{relative_l2, Direction, WaveOpConfig, WaveOperator};
use scatter1d::{ComplexSignal, Grid, SampledPotential};
use std::sync::OnceLock;

fn grid() -> Grid<f64> {
    Grid::new(-20.0, 20.0, 1025).unwrap()
}

fn barrier() -> SampledPotential<f64> {
    SampledPotential::from_fn(grid(), |x| 0.6 * (-x * x).exp()).unwrap()
}

fn operators() -> &'static [WaveOperator<f64>; 2] {
    static OPS: OnceLock<[WaveOperator<f64>; 2]> = OnceLock::new();
    OPS.get_or_init(|| {
        let v = barrier();
        let cfg = WaveOpConfig::for_potential(&v);
        [Direction::Plus, Direction::Minus].map(|d| WaveOperator::build(&v, &cfg, d).unwrap())
    })
}

fn packet(x0: f64, k0: f64, s: f64, t: f64) -> ComplexSignal<f64> {
    ComplexSignal::from_fn(grid(), |x| free_gaussian(x, t, x0, k0, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn adjoint_pairing(
        x0 in -4.0f64..4.0, k0 in -3.0f64..3.0, s in 1.0f64..2.0,
        y0 in -4.0f64..4.0, q0 in -3.0f64..3.0, r in 1.0f64..2.0, plus in any::<bool>(),
    ) {
        let w = &operators()[usize::from(!plus)];
        let g = packet(x0, k0, s, 0.0);
        let u = packet(y0, q0, r, 0.0);
        let lhs = w.apply(&g).unwrap().inner(&u);
        let rhs = g.inner(&w.adjoint(&u).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-10 * g.l2_norm() * u.l2_norm());
    }

    // spectra are kept off λ = 0, where Wg grows a 1/x tail that leaves the finite grid
    #[test]
    fn wave_operators_are_isometric(
        x0 in -3.0f64..3.0, k0 in 2.5f64..4.0, s in 1.5f64..2.0, left in any::<bool>(), plus in any::<bool>(),
    ) {
        let w = &operators()[usize::from(!plus)];
        let g = packet(x0, if left { -k0 } else { k0 }, s, 0.0);
        let wg = w.apply(&g).unwrap();
        prop_assert!((wg.l2_norm() - g.l2_norm()).abs() < 1e-3 * g.l2_norm());
        prop_assert!(relative_l2(&w.adjoint(&wg).unwrap(), &g) < 3e-3);
    }
}

#[test]
fn intertwines_the_free_and_perturbed_flows() {
    let v = barrier();
    for w in operators() {
        let g0 = packet(-2.0, 1.5, 1.5, 0.0);
        for t in [0.5, 1.0] {
            let lhs = crank_nicolson(&v, &w.apply(&g0).unwrap(), t, 5e-5).unwrap();
            let rhs = w.apply(&packet(-2.0, 1.5, 1.5, t)).unwrap();
            let err = relative_l2(&lhs, &rhs);
            assert!(err < 5e-3, "{:?} t = {t}: {err}", w.direction);
        }
    }
}

#[test]
fn fewer_born_terms_suffice_for_weak_potentials() {
    let v = barrier();
    let mut cfg = WaveOpConfig::for_potential(&v);
    cfg.n_series = 20;
    let short = WaveOperator::build(&v, &cfg, Direction::Plus).unwrap();
    let g = packet(1.0, -2.0, 1.3, 0.0);
    let err = relative_l2(&short.apply(&g).unwrap(), &operators()[0].apply(&g).unwrap());
    assert!(err < 1e-10, "{err}");
}

#[test]
fn low_energy_transmission_factor() {
    // λ/W(λ) tends to a nonzero limit for the resonant well and to zero otherwise
    let pt = SampledPotential::poschl_teller(grid(), 1.0);
    let o = PoschlTeller;
    for eps in [1e-2, 1e-3] {
        for s in [-1.0, 1.0] {
            let z = Complex64::new(s * eps, 0.0);
            let got = z / wronskian_at(&pt, z);
            let exact = z / o.wronskian(z);
            assert!((got - exact).norm() < 1e-4, "ε = {}: {got} vs {exact}", s * eps);
        }
    }
    let well = SampledPotential::square_well(grid(), 0.3, 1.0).unwrap();
    let w0 = wronskian_at(&well, Complex64::new(0.0, 0.0)).norm();
    assert!(w0 > 1e-2);
    for eps in [1e-2, 1e-3, 1e-4] {
        for s in [-1.0, 1.0] {
            let z = Complex64::new(s * eps, 0.0);
            assert!((z / wronskian_at(&well, z)).norm() <= 2.0 * eps / w0);
        }
    }
}
