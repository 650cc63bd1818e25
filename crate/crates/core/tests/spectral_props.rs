mod common;

use common::*;
use kare_core::faer::{Mat, Side};
use kare_core::kernels::{gram_matrix, KernelFamily, KernelSpec};
use kare_core::rng;
use kare_core::spectral::{decompose, GramSpectrum};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn gram_matrices_are_psd() {
    for family in KernelFamily::ALL {
        for case in 0..50u64 {
            let mut r = rng::stream(11, case);
            let n = r.random_range(2..=200);
            let d = r.random_range(1..=8);
            let scale = (0.1 + 5.0 * r.random::<f64>()) * d as f64;
            let x = random_inputs(&mut r, n, d);
            let g = gram_matrix(&KernelSpec::new(family, scale).unwrap(), x.as_ref()).unwrap();
            let ev = g.self_adjoint_eigenvalues(Side::Lower).unwrap();
            let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8 * n as f64, "{family} case {case}: {min}");
        }
    }
}

#[test]
fn solve_and_spectrum_agree() {
    for case in 0..20u64 {
        let mut r = rng::stream(12, case);
        let n = r.random_range(2..=200);
        let rank = r.random_range(1..=n);
        let b = random_inputs(&mut r, n, rank);
        let g = &b * b.transpose();
        let g = Mat::from_fn(n, n, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]));
        let s = decompose(g.as_ref(), n).unwrap();
        for lambda in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let inv = resolvent(g.as_ref(), lambda);
            let direct = (0..n).map(|i| inv[(i, i)]).sum::<f64>() / n as f64;
            let spectral = s.stieltjes(lambda).unwrap();
            assert!(rel(spectral, direct) <= 1e-8, "case {case} λ={lambda}: {spectral} vs {direct}");
        }
    }
}

fn spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 1e-8..10.0f64], 1..60)
}

proptest! {
    #[test]
    fn stieltjes_is_decreasing_and_in_cone(ev in spectrum(), a in -4.0..1.0f64, step in 0.01..1.0f64) {
        let s = GramSpectrum::from_eigenvalues(ev).unwrap();
        let (l1, l2) = (10f64.powf(a), 10f64.powf(a + step));
        let (m1, m2) = (s.stieltjes(l1).unwrap(), s.stieltjes(l2).unwrap());
        prop_assert!(m1 > 0.0 && m1 <= 1.0 / l1);
        prop_assert!(m2 < m1);
        prop_assert!(s.stieltjes_derivative(l2).unwrap() < s.stieltjes_derivative(l1).unwrap());
    }
}
