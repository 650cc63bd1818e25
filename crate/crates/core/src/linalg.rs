//! Thin helpers over faer for the handful of dense operations the crate needs.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Col, Mat, MatRef, Side};

use crate::error::{Error, Result};

pub(crate) fn col_from(v: &[f64]) -> Col<f64> {
    Col::from_fn(v.len(), |i| v[i])
}

pub(crate) fn col_to_vec(c: &Col<f64>) -> Vec<f64> {
    (0..c.nrows()).map(|i| c[i]).collect()
}

/// `A x` for a dense matrix and a slice.
pub(crate) fn mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.ncols(), x.len());
    let mut out = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = a.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += col[i] * xj;
        }
    }
    out
}

/// `Aᵀ x`.
pub(crate) fn mat_t_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.nrows(), x.len());
    (0..a.ncols())
        .map(|j| {
            let col = a.col(j);
            x.iter().enumerate().map(|(i, &xi)| col[i] * xi).sum()
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn max_asymmetry(g: MatRef<'_, f64>) -> f64 {
    let n = g.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((g[(i, j)] - g[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn check_square(g: MatRef<'_, f64>, what: &str) -> Result<usize> {
    if g.nrows() != g.ncols() {
        return Err(Error::input(format!(
            "{what} must be square, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    if g.nrows() == 0 {
        return Err(Error::input(format!("{what} is empty")));
    }
    Ok(g.nrows())
}

/// Ascending eigenvalues and matching orthonormal eigenvectors of a symmetric matrix.
pub(crate) fn symmetric_eigen(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numeric(format!("eigendecomposition failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..s.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

pub(crate) fn symmetric_eigenvalues(m: MatRef<'_, f64>) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::numeric(format!("eigendecomposition failed: {e:?}")))
}

/// Cholesky factor of the SPD matrix `G/n + λI`.
pub(crate) struct RidgeFactor {
    llt: faer::linalg::solvers::Llt<f64>,
    n: usize,
}

impl RidgeFactor {
    pub(crate) fn new(gram: MatRef<'_, f64>, lambda: f64) -> Result<Self> {
        let n = check_square(gram, "gram matrix")?;
        let scale = 1.0 / n as f64;
        let a = Mat::from_fn(n, n, |i, j| {
            gram[(i, j)] * scale + if i == j { lambda } else { 0.0 }
        });
        let llt = a
            .llt(Side::Lower)
            .map_err(|e| Error::numeric(format!("cholesky factorization failed: {e:?}")))?;
        Ok(RidgeFactor { llt, n })
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut c = col_from(rhs);
        self.llt.solve_in_place(c.as_mat_mut());
        col_to_vec(&c)
    }

    pub(crate) fn solve_mat(&self, rhs: MatRef<'_, f64>) -> Mat<f64> {
        self.llt.solve(rhs)
    }

    /// `Tr[(G/n + λI)⁻¹]`.
    pub(crate) fn inverse_trace(&self) -> f64 {
        let inv = self.llt.inverse();
        (0..self.n).map(|i| inv[(i, i)]).sum()
    }

    /// `log det(G/n + λI)`.
    pub(crate) fn log_det(&self) -> f64 {
        let l = self.llt.L();
        2.0 * (0..self.n).map(|i| l[(i, i)].ln()).sum::<f64>()
    }
}
