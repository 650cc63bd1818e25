mod common;

use common::*;
use kare_core::sct::{sct_residual, solve_sct, Spectrum};
use proptest::prelude::*;

fn pairs() -> impl Strategy<Value = Vec<(f64, u64)>> {
    prop::collection::vec((1e-6..10.0f64, 1u64..=5), 1..=50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solver_matches_bisection_and_bounds(p in pairs(), n in prop::sample::select(vec![10u64, 100, 1000]), a in -4.0..0.0f64) {
        let lambda = 10f64.powf(a);
        let spec = Spectrum::from_pairs(&p).unwrap();
        let r = solve_sct(&spec, n, lambda).unwrap();
        let oracle = sct_bisect(&p, n, lambda);
        prop_assert!(rel(r.theta, oracle) <= 1e-10, "{} vs {}", r.theta, oracle);
        let tr = spec.trace();
        prop_assert!(sct_residual(&spec, n, lambda, r.theta).abs() <= 1e-12 * (lambda + tr / n as f64));
        prop_assert!(r.theta > lambda && r.theta <= (lambda + tr / n as f64) * (1.0 + 1e-12));
        prop_assert!(r.theta_prime >= 1.0 - 1e-12 && r.theta_prime <= r.theta / lambda * (1.0 + 1e-12));
        prop_assert!(solve_sct(&spec, 2 * n, lambda).unwrap().theta < r.theta);
    }

    #[test]
    fn derivative_matches_finite_difference(p in pairs(), a in -3.0..0.0f64) {
        let lambda = 10f64.powf(a);
        let spec = Spectrum::from_pairs(&p).unwrap();
        let h = 1e-6 * lambda;
        let fd = (solve_sct(&spec, 100, lambda + h).unwrap().theta - solve_sct(&spec, 100, lambda - h).unwrap().theta) / (2.0 * h);
        prop_assert!(rel(solve_sct(&spec, 100, lambda).unwrap().theta_prime, fd) <= 1e-4);
    }

    #[test]
    fn derivative_decreases_in_ridge(p in pairs(), n in 1u64..2000) {
        let spec = Spectrum::from_pairs(&p).unwrap();
        let d: Vec<f64> = [1e-4, 1e-3, 1e-2, 1e-1, 1.0].iter().map(|&l| solve_sct(&spec, n, l).unwrap().theta_prime).collect();
        prop_assert!(d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}
