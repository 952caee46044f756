use proptest::prelude::*;
use scatter1d::liouville::{build_map, LiouvilleOptions};
use scatter1d::propagator::relative_error;
use scatter1d::{ComplexSignal, Grid, SampledPotential, ScatterError};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_smooth_coefficients(
        alpha in -0.5f64..1.0, ca in -2.0f64..2.0, wa in 0.7f64..2.0,
        beta in -0.3f64..0.3, cb in -2.0f64..2.0,
        depth in -1.0f64..1.0,
    ) {
        let g = Grid::<f64>::new(-30.0, 30.0, 4096).unwrap();
        let x = g.points();
        let a: Vec<f64> = x.iter().map(|x| 1.0 + alpha * (-(x - ca).powi(2) / wa).exp()).collect();
        let b: Vec<f64> = x.iter().map(|x| beta * (x - cb) * (-(x - cb).powi(2)).exp()).collect();
        let v = SampledPotential::from_fn(g, |x| depth * (-x * x / 2.0).exp()).unwrap();
        let map = build_map(&a, &b, &v, &LiouvilleOptions::default()).unwrap();
        let meta = map.metadata();
        prop_assert!(meta.variants.corrected_residual < 1e-4, "{}", meta.variants.corrected_residual);
        prop_assert!(meta.hypotheses.passed);
        let f = ComplexSignal::from_fn(g, |x| num_complex::Complex64::new(0.0, 1.3 * x).exp() * (-x * x / 4.0).exp());
        let back = map.pushforward(&map.pullback(&f).unwrap()).unwrap();
        prop_assert!(relative_error(&back, &f) < 1e-6, "{}", relative_error(&back, &f));
        // c is increasing and x(c(x)) = x
        for i in (0..g.n).step_by(97) {
            prop_assert!((map.x_of(map.c[i]) - g.x(i)).abs() < 1e-8);
        }
        prop_assert!(map.c.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn degenerate_leading_coefficient_is_rejected() {
    let g = Grid::<f64>::new(-10.0, 10.0, 801).unwrap();
    let a: Vec<f64> = g.points().iter().map(|x| 1.0 - (-x * x).exp()).collect();
    let b = vec![0.0; g.n];
    let r = build_map(&a, &b, &SampledPotential::zero(g), &LiouvilleOptions::default());
    assert!(matches!(r, Err(ScatterError::Hypothesis(_))));
}
