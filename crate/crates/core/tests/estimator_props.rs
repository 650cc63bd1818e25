mod common;

use common::*;
use kare_core::estimators::{
    bias_norm_sq, kare, theoretical_risk, theoretical_train_error, varrho, RidgeEvaluator, TrueFunction,
};
use kare_core::faer::Mat;
use kare_core::kernels::{gram_matrix, KernelSpec};
use kare_core::rng;
use kare_core::sct::{solve_sct, Spectrum};
use proptest::prelude::*;

fn labelled_gram(seed: u64, n: usize) -> (Mat<f64>, Vec<f64>) {
    let mut r = rng::stream(seed, 0);
    let x = random_inputs(&mut r, n, 3);
    let y = (0..n).map(|_| rng::standard_normal(&mut r)).collect();
    (gram_matrix(&KernelSpec::rbf(4.0).unwrap(), x.as_ref()).unwrap(), y)
}

#[test]
fn kare_matches_explicit_formula() {
    let (g, y) = labelled_gram(31, 40);
    let n = 40.0;
    for lambda in [1e-3, 1e-1, 1.0] {
        let inv = resolvent(g.as_ref(), lambda);
        let v = mat_vec(inv.as_ref(), &y);
        let m = (0..40).map(|i| inv[(i, i)]).sum::<f64>() / n;
        let tr2: f64 = (0..40).map(|i| (0..40).map(|j| inv[(i, j)] * inv[(j, i)]).sum::<f64>()).sum();
        let expected_kare = dot(&v, &v) / n / (m * m);
        let expected_varrho = dot(&v, &v) / tr2;
        assert!(rel(kare(&y, g.as_ref(), lambda).unwrap(), expected_kare) <= 1e-9);
        assert!(rel(varrho(&y, g.as_ref(), lambda).unwrap(), expected_varrho) <= 1e-9);
        let s = RidgeEvaluator::from_gram(g.as_ref(), &y).unwrap().scores(lambda).unwrap();
        assert!(rel(s.kare, expected_kare) <= 1e-9);
        assert!(rel(s.varrho, expected_varrho) <= 1e-9);
    }
}

#[test]
fn kare_rescaling_invariance() {
    let (g, y) = labelled_gram(32, 30);
    for lambda in [1e-3, 1e-1] {
        let (k0, v0) = (kare(&y, g.as_ref(), lambda).unwrap(), varrho(&y, g.as_ref(), lambda).unwrap());
        for alpha in [1e-2, 1e2] {
            let ga = Mat::from_fn(30, 30, |i, j| alpha * g[(i, j)]);
            assert!(rel(kare(&y, ga.as_ref(), alpha * lambda).unwrap(), k0) <= 1e-10);
            assert!(rel(varrho(&y, ga.as_ref(), alpha * lambda).unwrap(), v0) <= 1e-10);
        }
    }
}

fn spectrum_and_function() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (1usize..40).prop_flat_map(|m| {
        (
            prop::collection::vec(1e-5..5.0f64, m),
            prop::collection::vec(-2.0..2.0f64, m),
            0.0..1.0f64,
        )
    })
}

proptest! {
    #[test]
    fn kare_positive_and_finite(seed in 0u64..1000, a in -6.0..2.0f64) {
        let (g, y) = labelled_gram(seed, 12);
        let k = kare(&y, g.as_ref(), 10f64.powf(a)).unwrap();
        prop_assert!(k.is_finite() && k > 0.0);
    }

    #[test]
    fn ratio_law((d, b, eps) in spectrum_and_function(), n in 1u64..5000, a in -5.0..1.0f64) {
        let lambda = 10f64.powf(a);
        let spec = Spectrum::from_eigenvalues(&d).unwrap();
        let f = TrueFunction::new(b, eps).unwrap();
        let theta = solve_sct(&spec, n, lambda).unwrap().theta;
        let risk = theoretical_risk(&spec, &f, n, lambda).unwrap();
        let train = theoretical_train_error(&spec, &f, n, lambda).unwrap();
        prop_assert!(rel(risk, theta * theta / (lambda * lambda) * train) <= 1e-12);
    }

    #[test]
    fn bias_grows_with_ridge((d, b, _) in spectrum_and_function(), n in 1u64..5000) {
        let spec = Spectrum::from_eigenvalues(&d).unwrap();
        let biases: Vec<f64> = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
            .iter()
            .map(|&l| bias_norm_sq(&d, &b, solve_sct(&spec, n, l).unwrap().theta))
            .collect();
        prop_assert!(biases.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    }
}
