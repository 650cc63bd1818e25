//! Exponential kernels and Gram matrix construction.
//!
//! All three families are `exp(-dist(x, x') / lengthscale)` for a family
//! specific distance: squared Euclidean (`rbf`), Euclidean (`laplacian`) or
//! Manhattan (`l1exp`). There is no factor of two in the denominator.

use std::fmt;
use std::str::FromStr;

use faer::{Mat, MatRef};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Rbf,
    Laplacian,
    L1Exp,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [KernelFamily::Rbf, KernelFamily::Laplacian, KernelFamily::L1Exp];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Rbf => "rbf",
            KernelFamily::Laplacian => "laplacian",
            KernelFamily::L1Exp => "l1exp",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rbf" | "gaussian" => Ok(KernelFamily::Rbf),
            "laplacian" | "laplace" => Ok(KernelFamily::Laplacian),
            "l1exp" | "l1" => Ok(KernelFamily::L1Exp),
            other => Err(Error::input(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// A kernel family together with its lengthscale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    lengthscale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscale: f64) -> Result<Self> {
        if !(lengthscale > 0.0 && lengthscale.is_finite()) {
            return Err(Error::domain(format!(
                "lengthscale must be positive and finite, got {lengthscale}"
            )));
        }
        Ok(KernelSpec {
            family,
            lengthscale,
        })
    }

    pub fn rbf(lengthscale: f64) -> Result<Self> {
        Self::new(KernelFamily::Rbf, lengthscale)
    }

    pub fn laplacian(lengthscale: f64) -> Result<Self> {
        Self::new(KernelFamily::Laplacian, lengthscale)
    }

    pub fn l1exp(lengthscale: f64) -> Result<Self> {
        Self::new(KernelFamily::L1Exp, lengthscale)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    /// Evaluates `K(x, x')`. Panics-free; mismatched lengths are an input error.
    pub fn eval(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        if x.len() != x_prime.len() {
            return Err(Error::input(format!(
                "dimension mismatch: {} vs {}",
                x.len(),
                x_prime.len()
            )));
        }
        Ok(self.eval_unchecked(x, x_prime))
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], x_prime: &[f64]) -> f64 {
        let dist = match self.family {
            // direct sum of squares; the expanded form cancels badly on near duplicates
            KernelFamily::Rbf => x
                .iter()
                .zip(x_prime)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>(),
            KernelFamily::Laplacian => x
                .iter()
                .zip(x_prime)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            KernelFamily::L1Exp => x.iter().zip(x_prime).map(|(a, b)| (a - b).abs()).sum(),
        };
        (-dist / self.lengthscale).exp()
    }
}

/// Free-function form of [`KernelSpec::eval`].
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    spec.eval(x, x_prime)
}

/// Copies the rows of `x` into a contiguous row-major buffer.
pub(crate) fn row_major(x: MatRef<'_, f64>) -> Vec<f64> {
    let (n, d) = (x.nrows(), x.ncols());
    let mut out = Vec::with_capacity(n * d);
    for i in 0..n {
        for j in 0..d {
            out.push(x[(i, j)]);
        }
    }
    out
}

/// `G_ij = K(x_i, x_j)` for the rows of `x` (one sample per row).
pub fn gram_matrix(spec: &KernelSpec, x: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::input("gram matrix needs at least one sample"));
    }
    let d = x.ncols();
    let rows = row_major(x);
    let row = |i: usize| &rows[i * d..(i + 1) * d];

    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| spec.eval_unchecked(row(i), row(j))).collect())
        .collect();

    let mut g = Mat::<f64>::zeros(n, n);
    for (i, vals) in upper.iter().enumerate() {
        for (off, &v) in vals.iter().enumerate() {
            let j = i + off;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// `C_ai = K(t_a, x_i)` between test rows and training rows.
pub fn cross_gram(
    spec: &KernelSpec,
    x_test: MatRef<'_, f64>,
    x_train: MatRef<'_, f64>,
) -> Result<Mat<f64>> {
    if x_test.ncols() != x_train.ncols() {
        return Err(Error::input(format!(
            "dimension mismatch: test points have {} features, training points {}",
            x_test.ncols(),
            x_train.ncols()
        )));
    }
    let (m, n, d) = (x_test.nrows(), x_train.nrows(), x_train.ncols());
    let test = row_major(x_test);
    let train = row_major(x_train);

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let t = &test[a * d..(a + 1) * d];
            (0..n)
                .map(|i| spec.eval_unchecked(t, &train[i * d..(i + 1) * d]))
                .collect()
        })
        .collect();
    Ok(Mat::from_fn(m, n, |a, i| rows[a][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> Mat<f64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn rbf_values() {
        let k = KernelSpec::rbf(1.0).unwrap();
        assert_eq!(k.eval(&[0.3, -2.0], &[0.3, -2.0]).unwrap(), 1.0);
        assert_relative_eq!(k.eval(&[0.0], &[1.0]).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(k.eval(&[0.0], &[1.0]).unwrap(), 0.367879, epsilon = 1e-6);
    }

    #[test]
    fn laplacian_value() {
        let k = KernelSpec::laplacian(2.0).unwrap();
        let v = k.eval(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(v, (-2.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(v, 0.082085, epsilon = 1e-6);
    }

    #[test]
    fn l1_value() {
        let k = KernelSpec::l1exp(7.0).unwrap();
        let v = k.eval(&[0.0, 0.0], &[3.0, -4.0]).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(KernelSpec::rbf(0.0), Err(Error::Domain(_))));
        assert!(matches!(KernelSpec::rbf(-1.0), Err(Error::Domain(_))));
        assert!(KernelSpec::rbf(f64::NAN).is_err());
        let k = KernelSpec::rbf(1.0).unwrap();
        assert!(matches!(k.eval(&[0.0], &[0.0, 1.0]), Err(Error::Input(_))));
        let a = Mat::<f64>::zeros(2, 3);
        let b = Mat::<f64>::zeros(2, 2);
        assert!(cross_gram(&k, a.as_ref(), b.as_ref()).is_err());
    }

    #[test]
    fn gram_examples() {
        let k = KernelSpec::rbf(1.0).unwrap();
        let g1 = gram_matrix(&k, mat(&[&[4.2, 1.0]]).as_ref()).unwrap();
        assert_eq!((g1.nrows(), g1[(0, 0)]), (1, 1.0));

        let x = mat(&[&[0.0], &[1.0]]);
        let g = gram_matrix(&k, x.as_ref()).unwrap();
        let e = (-1.0f64).exp();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], 1.0);
        assert_relative_eq!(g[(0, 1)], e, max_relative = 1e-15);
        assert_eq!(g[(0, 1)], g[(1, 0)]);

        let dup = mat(&[&[0.5, 0.5], &[1.0, 2.0], &[0.5, 0.5]]);
        let g = gram_matrix(&k, dup.as_ref()).unwrap();
        assert_eq!(g[(0, 2)], 1.0);
    }

    #[test]
    fn cross_gram_examples() {
        let k = KernelSpec::rbf(1.0).unwrap();
        let train = mat(&[&[0.0], &[1.0]]);
        let c = cross_gram(&k, mat(&[&[0.0]]).as_ref(), train.as_ref()).unwrap();
        assert_eq!((c.nrows(), c.ncols()), (1, 2));
        assert_eq!(c[(0, 0)], 1.0);
        assert_relative_eq!(c[(0, 1)], (-1.0f64).exp(), max_relative = 1e-15);

        let x = mat(&[&[0.1, 0.2], &[-1.0, 0.4], &[2.0, 2.0]]);
        for fam in KernelFamily::ALL {
            let k = KernelSpec::new(fam, 1.3).unwrap();
            let g = gram_matrix(&k, x.as_ref()).unwrap();
            let c = cross_gram(&k, x.as_ref(), x.as_ref()).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(g[(i, j)], c[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn rbf_scaling_consistency() {
        // scaling inputs by sqrt(s) and the lengthscale by s leaves G unchanged
        let x = mat(&[&[0.1, -0.7], &[1.2, 0.3], &[-0.4, 2.2], &[0.0, 0.0]]);
        let s: f64 = 3.7;
        let xs = Mat::from_fn(4, 2, |i, j| x[(i, j)] * s.sqrt());
        let g = gram_matrix(&KernelSpec::rbf(0.9).unwrap(), x.as_ref()).unwrap();
        let gs = gram_matrix(&KernelSpec::rbf(0.9 * s).unwrap(), xs.as_ref()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(g[(i, j)], gs[(i, j)], max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn parse_family() {
        assert_eq!("RBF".parse::<KernelFamily>().unwrap(), KernelFamily::Rbf);
        assert_eq!("laplacian".parse::<KernelFamily>().unwrap(), KernelFamily::Laplacian);
        assert_eq!("l1exp".parse::<KernelFamily>().unwrap(), KernelFamily::L1Exp);
        assert!("poly".parse::<KernelFamily>().is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_symmetric(
            a in prop::collection::vec(-3.0f64..3.0, 4),
            b in prop::collection::vec(-3.0f64..3.0, 4),
            ell in 0.5f64..20.0,
        ) {
            for fam in KernelFamily::ALL {
                let k = KernelSpec::new(fam, ell).unwrap();
                let v = k.eval(&a, &b).unwrap();
                prop_assert!(v > 0.0 && v <= 1.0);
                prop_assert_eq!(v, k.eval(&b, &a).unwrap());
            }
        }
    }
}
