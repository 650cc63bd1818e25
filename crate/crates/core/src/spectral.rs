//! Spectrum of the normalized Gram matrix `G/N` and its Stieltjes transform
//! on the negative real axis.
//!
//! A Gram matrix is decomposed once; every ridge evaluation afterwards is
//! O(N) (eigenvalues only) or O(N²) (when eigenvectors are needed to apply
//! the resolvent to a label vector).

use faer::{Mat, MatRef};

use crate::error::{check_ridge, Error, Result};
use crate::linalg;

/// Eigenvalues below this are a broken kernel, not rounding noise.
pub const NEGATIVE_EIGENVALUE_TOLERANCE: f64 = 1e-8;
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Eigenvalues of `G/N`, ascending and clamped to be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpectrum {
    eigenvalues: Vec<f64>,
    n: usize,
}

impl GramSpectrum {
    /// Builds a spectrum from precomputed eigenvalues of `G/N`.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::input("spectrum needs at least one eigenvalue"));
        }
        for &mu in &eigenvalues {
            if !mu.is_finite() {
                return Err(Error::numeric("non-finite gram eigenvalue"));
            }
            if mu < -NEGATIVE_EIGENVALUE_TOLERANCE {
                return Err(Error::numeric(format!(
                    "gram matrix is not positive semidefinite (eigenvalue {mu:e})"
                )));
            }
        }
        for mu in eigenvalues.iter_mut() {
            *mu = mu.max(0.0);
        }
        eigenvalues.sort_by(f64::total_cmp);
        let n = eigenvalues.len();
        Ok(GramSpectrum { eigenvalues, n })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `m_G(-λ) = (1/N) Σ 1/(μ_i + λ)`.
    pub fn stieltjes(&self, lambda: f64) -> Result<f64> {
        check_ridge(lambda)?;
        Ok(self.eigenvalues.iter().map(|mu| 1.0 / (mu + lambda)).sum::<f64>() / self.n as f64)
    }

    /// `∂_z m_G(z)` at `z = -λ`, i.e. `(1/N) Σ 1/(μ_i + λ)²`.
    pub fn stieltjes_derivative(&self, lambda: f64) -> Result<f64> {
        check_ridge(lambda)?;
        Ok(self
            .eigenvalues
            .iter()
            .map(|mu| {
                let r = 1.0 / (mu + lambda);
                r * r
            })
            .sum::<f64>()
            / self.n as f64)
    }

    /// `(1/N) Σ log(μ_i + λ)`, the normalized log-determinant of `G/N + λI`.
    pub fn mean_log_det(&self, lambda: f64) -> Result<f64> {
        check_ridge(lambda)?;
        Ok(self.eigenvalues.iter().map(|mu| (mu + lambda).ln()).sum::<f64>() / self.n as f64)
    }

    /// `(1/N) Tr[G/N]`.
    pub fn mean_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.n as f64
    }
}

fn validate_symmetric(g: MatRef<'_, f64>) -> Result<usize> {
    let n = linalg::check_square(g, "gram matrix")?;
    let scale = (0..n).map(|i| g[(i, i)].abs()).fold(1.0f64, f64::max);
    let asym = linalg::max_asymmetry(g);
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::input(format!(
            "gram matrix is not symmetric (max asymmetry {asym:e})"
        )));
    }
    Ok(n)
}

fn normalized(g: MatRef<'_, f64>, n: usize) -> Mat<f64> {
    let s = 1.0 / n as f64;
    let dim = g.nrows();
    // symmetrize so the eigensolver sees an exactly symmetric matrix
    Mat::from_fn(dim, dim, |i, j| 0.5 * (g[(i, j)] + g[(j, i)]) * s)
}

/// Eigenvalues of `G/n`; `n` must equal the number of rows of `G`.
pub fn decompose(g: MatRef<'_, f64>, n: usize) -> Result<GramSpectrum> {
    let dim = validate_symmetric(g)?;
    if n != dim {
        return Err(Error::input(format!(
            "sample count {n} does not match gram size {dim}"
        )));
    }
    GramSpectrum::from_eigenvalues(linalg::symmetric_eigenvalues(normalized(g, n).as_ref())?)
}

/// Eigenvalues together with eigenvectors of `G/N`.
///
/// This is the shared per-dataset object of a ridge sweep: with `w = Vᵀy`
/// cached, every quadratic form `yᵀ(G/N + λI)^{-p} y` costs O(N).
#[derive(Debug, Clone)]
pub struct GramEigen {
    spectrum: GramSpectrum,
    vectors: Mat<f64>,
}

impl GramEigen {
    pub fn new(g: MatRef<'_, f64>) -> Result<Self> {
        let n = validate_symmetric(g)?;
        let (values, vectors) = linalg::symmetric_eigen(normalized(g, n).as_ref())?;
        // faer returns ascending order; keep vectors aligned with the clamped values
        let spectrum = GramSpectrum::from_eigenvalues(values)?;
        Ok(GramEigen { spectrum, vectors })
    }

    pub fn spectrum(&self) -> &GramSpectrum {
        &self.spectrum
    }

    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    pub fn n(&self) -> usize {
        self.spectrum.n
    }

    /// Coordinates `Vᵀy` of a vector in the eigenbasis.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n() {
            return Err(Error::input(format!(
                "vector length {} does not match gram size {}",
                y.len(),
                self.n()
            )));
        }
        Ok(linalg::mat_t_vec(self.vectors.as_ref(), y))
    }

    /// `(G/N + λI)^{-1} y` given the projected coordinates `w = Vᵀy`.
    pub fn resolvent_apply_projected(&self, w: &[f64], lambda: f64) -> Result<Vec<f64>> {
        check_ridge(lambda)?;
        let scaled: Vec<f64> = w
            .iter()
            .zip(self.spectrum.eigenvalues())
            .map(|(wi, mu)| wi / (mu + lambda))
            .collect();
        Ok(linalg::mat_vec(self.vectors.as_ref(), &scaled))
    }

    /// `(G/N + λI)^{-1} y`.
    pub fn resolvent_apply(&self, y: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let w = self.project(y)?;
        self.resolvent_apply_projected(&w, lambda)
    }
}

/// `m_G(-λ)`; free-function form of [`GramSpectrum::stieltjes`].
pub fn stieltjes(s: &GramSpectrum, lambda: f64) -> Result<f64> {
    s.stieltjes(lambda)
}

pub fn stieltjes_derivative(s: &GramSpectrum, lambda: f64) -> Result<f64> {
    s.stieltjes_derivative(lambda)
}
