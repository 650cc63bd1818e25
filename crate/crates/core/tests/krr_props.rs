mod common;

use std::sync::Arc;

use common::*;
use kare_core::estimators::RidgeEvaluator;
use kare_core::kernels::{gram_matrix, KernelFamily, KernelSpec};
use kare_core::{krr, rng};
use kare_core::faer::Mat;
use rand::Rng;

#[test]
fn train_error_closed_form_identity() {
    for case in 0..50u64 {
        let mut r = rng::stream(21, case);
        let n = r.random_range(3..=60);
        let d = r.random_range(1..=6);
        let family = KernelFamily::ALL[r.random_range(0..3)];
        let kernel = KernelSpec::new(family, (0.2 + 4.0 * r.random::<f64>()) * d as f64).unwrap();
        let lambda = 10f64.powf(-3.0 + 3.0 * r.random::<f64>());
        let x = Arc::new(random_inputs(&mut r, n, d));
        let y: Vec<f64> = (0..n).map(|_| rng::standard_normal(&mut r)).collect();

        let direct = krr::fit(&kernel, x.clone(), &y, lambda).unwrap().train_error(&y).unwrap();
        let g = gram_matrix(&kernel, x.as_ref().as_ref()).unwrap();
        let v = mat_vec(resolvent(g.as_ref(), lambda).as_ref(), &y);
        let closed = lambda * lambda / n as f64 * dot(&v, &v);
        assert!(rel(direct, closed) <= 1e-8, "case {case}: {direct} vs {closed}");
    }
}

#[test]
fn simultaneous_rescaling_leaves_predictions_unchanged() {
    let mut r = rng::stream(22, 0);
    let (n, m, d) = (30, 7, 3);
    let kernel = KernelSpec::rbf(3.0).unwrap();
    let x = random_inputs(&mut r, n, d);
    let xt = random_inputs(&mut r, m, d);
    let y: Vec<f64> = (0..n).map(|_| rng::standard_normal(&mut r)).collect();
    let g = gram_matrix(&kernel, x.as_ref()).unwrap();
    let c = kare_core::kernels::cross_gram(&kernel, xt.as_ref(), x.as_ref()).unwrap();
    let lambda = 0.05;
    let predict = |alpha: f64| {
        let ga = Mat::from_fn(n, n, |i, j| alpha * g[(i, j)]);
        let ca = Mat::from_fn(m, n, |i, j| alpha * c[(i, j)]);
        let dual: Vec<f64> = RidgeEvaluator::from_gram(ga.as_ref(), &y)
            .unwrap()
            .resolvent_labels(alpha * lambda)
            .unwrap()
            .into_iter()
            .map(|v| v / n as f64)
            .collect();
        mat_vec(ca.as_ref(), &dual)
    };
    let base = predict(1.0);
    for alpha in [0.1, 10.0] {
        for (a, b) in predict(alpha).iter().zip(&base) {
            assert!(rel(*a, *b) <= 1e-10, "α={alpha}: {a} vs {b}");
        }
    }
}

#[test]
fn train_error_increases_with_ridge() {
    for case in 0..10u64 {
        let mut r = rng::stream(23, case);
        let x = Arc::new(random_inputs(&mut r, 25, 2));
        let y: Vec<f64> = (0..25).map(|_| rng::standard_normal(&mut r)).collect();
        let k = KernelSpec::laplacian(2.0).unwrap();
        let errs: Vec<f64> = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
            .iter()
            .map(|&l| krr::fit(&k, x.clone(), &y, l).unwrap().train_error(&y).unwrap())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] >= w[0]), "{errs:?}");
    }
}
