#![allow(dead_code)]

use kare_core::faer::linalg::solvers::Solve;
use kare_core::faer::{Mat, MatRef};
use kare_core::rng;
use rand::Rng;

pub fn random_inputs<R: Rng>(r: &mut R, n: usize, d: usize) -> Mat<f64> {
    let mut x = Mat::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            x[(i, j)] = rng::standard_normal(r);
        }
    }
    x
}

/// `(G/N + λI)^{-1}` through an LU solve against the identity.
pub fn resolvent(g: MatRef<'_, f64>, lambda: f64) -> Mat<f64> {
    let n = g.nrows();
    let a = Mat::from_fn(n, n, |i, j| g[(i, j)] / n as f64 + if i == j { lambda } else { 0.0 });
    a.partial_piv_lu().solve(Mat::<f64>::identity(n, n))
}

pub fn mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Plain geometric bisection on `ϑ = λ + (ϑ/n) Σ mult·d/(d+ϑ)`.
pub fn sct_bisect(pairs: &[(f64, u64)], n: u64, lambda: f64) -> f64 {
    let g = |t: f64| t - lambda - t / n as f64 * pairs.iter().map(|&(d, m)| m as f64 * d / (d + t)).sum::<f64>();
    let trace: f64 = pairs.iter().map(|&(d, m)| m as f64 * d).sum();
    let (mut lo, mut hi) = (lambda, lambda + trace / n as f64);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
