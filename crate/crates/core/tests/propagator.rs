use proptest::prelude::*;
use scatter1d::jost::JostOptions;
use scatter1d::oracles::free_gaussian;
use scatter1d::propagator::{
    besov_norm, crank_nicolson, dyadic_count, dyadic_cutoff, evolve_schrodinger, plan_for_spectrum, relative_error, spectral_synthesis,
    BesovSpec, Method, SpectralData,
};
use scatter1d::{ComplexSignal, Grid, SampledPotential, C};

fn packet(g: Grid<f64>, x0: f64, k0: f64, s: f64) -> ComplexSignal<f64> {
    ComplexSignal::from_fn(g, |x| free_gaussian(x, 0.0, x0, k0, s))
}

fn grid() -> Grid<f64> {
    Grid::new(-30.0, 30.0, 1201).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn crank_nicolson_conserves_the_l2_norm(
        depth in -1.5f64..1.5, x0 in -5.0f64..5.0, k0 in -2.0f64..2.0, s in 1.0f64..2.5, t in 0.1f64..3.0,
    ) {
        let g = grid();
        let v = SampledPotential::from_fn(g, |x| depth * (-x * x).exp()).unwrap();
        let f = packet(g, x0, k0, s);
        let u = crank_nicolson(&v, &f, t, 5e-3).unwrap();
        prop_assert!((u.l2_norm() - f.l2_norm()).abs() < 1e-10 * f.l2_norm());
    }

    #[test]
    fn dyadic_pieces_sum_to_one(lambda in -300.0f64..300.0) {
        let n = dyadic_count(lambda.abs().max(1.0)) + 1;
        let s: f64 = (0..n).map(|j| dyadic_cutoff(j, lambda)).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!((0..n).all(|j| (0.0..=1.0).contains(&dyadic_cutoff(j, lambda))));
    }

    #[test]
    fn besov_norm_is_homogeneous(
        re in -3.0f64..3.0, im in -3.0f64..3.0, s in -0.5f64..1.0, p in 1.5f64..6.0, r in 1.0f64..4.0, k0 in 0.0f64..3.0,
    ) {
        let g = grid();
        let f = packet(g, 0.5, k0, 1.3);
        let c = C::new(re, im);
        let b = BesovSpec { s, p, r };
        let lhs = besov_norm(&f.scale(c), &b, None).unwrap();
        let rhs = c.norm() * besov_norm(&f, &b, None).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }
}

#[test]
fn spectral_resolution_is_complete() {
    // the Pöschl–Teller well has one bound state and a zero-energy resonance
    let g = grid();
    let v = SampledPotential::poschl_teller(g, 1.0);
    let spec = SpectralData::new(&v, &JostOptions::default()).unwrap();
    let f = packet(g, -1.0, 0.7, 1.4);
    let plan = plan_for_spectrum(&spec, &f, &g, 0.0);
    let one = |_: usize, _: f64| C::new(1.0, 0.0);
    let back = spectral_synthesis(&spec, &f, &[g], &plan, |_, _| C::new(1.0, 0.0), Some(&one)).unwrap().remove(0);
    assert!(relative_error(&back, &f) < 1e-6, "{}", relative_error(&back, &f));
}

#[test]
fn distorted_fourier_matches_crank_nicolson_for_a_barrier() {
    let g = grid();
    let v = SampledPotential::from_fn(g, |x| 1.2 * (-x * x / 2.0).exp()).unwrap();
    let spec = SpectralData::new(&v, &JostOptions::default()).unwrap();
    assert!(spec.bound_states.is_empty());
    let f = packet(g, -4.0, 1.5, 1.5);
    for t in [0.5, 1.5] {
        let a = evolve_schrodinger(&spec, &f, t, Method::DistortedFourier).unwrap();
        let b = evolve_schrodinger(&spec, &f, t, Method::CrankNicolson { dt: 1e-3 }).unwrap();
        assert!(relative_error(&a, &b) < 1e-3, "t = {t}: {}", relative_error(&a, &b));
    }
}
