use num_complex::Complex64;
use proptest::prelude::*;
use scatter1d::jost::JostOptions;
use scatter1d::resolvent::{eigenfunction_born, eigenfunction_low, free_resolvent_apply, Limit, PerturbedResolvent};
use scatter1d::{Grid, SampledPotential};

fn bumps(grid: Grid<f64>, params: &[(f64, f64, f64)]) -> SampledPotential<f64> {
    SampledPotential::from_fn(grid, |x| params.iter().map(|(a, c, w)| a * (-(x - c).powi(2) / w).exp()).sum()).unwrap()
}

fn bump_params() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -2.0f64..2.0, 0.5f64..2.0), 1..3)
}

/// `R₀(z) f` at `z = κ²` with `Im κ > 0`, by direct trapezoid quadrature of `i e^{iκ|x-y|}/(2κ)`.
fn free_resolvent_direct(grid: &Grid<f64>, f: &[Complex64], kappa: Complex64) -> Vec<Complex64> {
    let w: Vec<f64> = (0..grid.n).map(|j| grid.weight(j)).collect();
    (0..grid.n)
        .map(|i| {
            let x = grid.x(i);
            let s: Complex64 = (0..grid.n)
                .map(|j| (Complex64::i() * kappa * (x - grid.x(j)).abs()).exp() * f[j] * w[j])
                .sum();
            s * Complex64::i() / (2.0 * kappa)
        })
        .collect()
}

fn weighted_distance(grid: &Grid<f64>, a: &[Complex64], b: &[Complex64]) -> f64 {
    (0..grid.n)
        .map(|i| ((a[i] - b[i]).norm() / (1.0 + grid.x(i).abs())).powi(2) * grid.weight(i))
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn perturbed_kernel_is_symmetric(params in bump_params(), lambda in 0.2f64..5.0, i in 0usize..401, j in 0usize..401) {
        let v = bumps(Grid::new(-10.0, 10.0, 401).unwrap(), &params);
        for limit in [Limit::PlusI0, Limit::MinusI0] {
            let r = PerturbedResolvent::new(&v, lambda, limit, &JostOptions::default()).unwrap();
            prop_assert_eq!(r.kernel(i, j), r.kernel(j, i));
        }
    }

    #[test]
    fn conjugate_data_gives_conjugate_eigenfunctions(params in bump_params(), lambda in 0.3f64..5.0) {
        let v = bumps(Grid::new(-12.0, 12.0, 481).unwrap(), &params);
        let opts = JostOptions::default();
        let a = eigenfunction_low(&v, lambda, Limit::PlusI0, &opts).unwrap();
        let b = eigenfunction_low(&v, -lambda, Limit::MinusI0, &opts).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p.conj() - q).norm() < 1e-12 * (1.0 + p.norm()));
        }
        let l1 = v.l1_norm();
        let high = lambda.max(l1) + 1.0;
        let a = eigenfunction_born(&v, high, Limit::PlusI0, 30).unwrap();
        let b = eigenfunction_born(&v, -high, Limit::MinusI0, 30).unwrap();
        for (p, q) in a.phi.iter().zip(&b.phi) {
            prop_assert!((p.conj() - q).norm() < 1e-12 * (1.0 + p.norm()));
        }
    }
}

#[test]
fn limiting_absorption_from_above() {
    let g = Grid::<f64>::new(-20.0, 20.0, 2001).unwrap();
    let f: Vec<Complex64> = g.points().iter().map(|x| Complex64::new((-x * x).exp(), 0.3 * x * (-x * x).exp())).collect();
    let lambda = 1.7;
    let limit = free_resolvent_apply(&g, &f, lambda, Limit::PlusI0).unwrap();
    let mut last = f64::INFINITY;
    for eps in [0.4, 0.2, 0.1, 0.05, 0.02] {
        let kappa = Complex64::new(lambda * lambda, eps).sqrt();
        let d = weighted_distance(&g, &free_resolvent_direct(&g, &f, kappa), &limit);
        assert!(d < last, "ε = {eps}: {d} >= {last}");
        last = d;
    }
    // the λ² - iε family approaches the other boundary value
    let kappa = -Complex64::new(lambda * lambda, -0.02).sqrt();
    let minus = free_resolvent_apply(&g, &f, lambda, Limit::MinusI0).unwrap();
    assert!(weighted_distance(&g, &free_resolvent_direct(&g, &f, kappa), &minus) < 2.0 * last);
}
