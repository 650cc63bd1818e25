//! Risk estimators and model-selection scores.
//!
//! Data-driven scores (all functions of the labels and the Gram matrix):
//!
//! | score | formula |
//! |-------|---------|
//! | KARE `ρ` | `(1/N) yᵀ(G/N+λI)⁻² y / ((1/N) Tr[(G/N+λI)⁻¹])²` |
//! | `ϱ` | `yᵀ(G/N+λI)⁻² y / Tr[(G/N+λI)⁻²]` |
//! | train error | `(λ²/N) yᵀ(G/N+λI)⁻² y` |
//! | log-likelihood | `-(1/N)[½ yᵀ(G/N+λI)⁻¹ y + ½ log det(G/N+λI)]` |
//! | alignment | `yᵀGy / (‖G‖_F ‖y‖²)` |
//!
//! The log-likelihood is the Gaussian-process evidence with covariance
//! `G/N + λI`, divided by `N`, with the `(N/2) log 2π` constant dropped.
//!
//! Theoretical counterparts take a population [`Spectrum`] and the
//! coefficients of the true function in the kernel eigenbasis.

use std::sync::Arc;

use faer::{Mat, MatRef};

use crate::error::{check_ridge, Error, Result};
use crate::kernels::{cross_gram, gram_matrix, KernelSpec};
use crate::krr::mean_squared_error;
use crate::linalg::{self, RidgeFactor};
use crate::rng;
use crate::sct::{solve_sct, sct_from_gram, SctResult, Spectrum};
use crate::spectral::GramEigen;

/// Coefficients `b_k` of the true function along the expanded eigenbasis,
/// plus the label noise level `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueFunction {
    pub coeffs: Vec<f64>,
    pub noise: f64,
}

impl TrueFunction {
    pub fn new(coeffs: Vec<f64>, noise: f64) -> Result<Self> {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::domain(format!("noise level must be nonnegative, got {noise}")));
        }
        Ok(TrueFunction { coeffs, noise })
    }

    /// `‖f*‖²_S = Σ b_k²`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|b| b * b).sum()
    }

    fn check_against(&self, expanded_len: usize) -> Result<()> {
        if self.coeffs.len() != expanded_len {
            return Err(Error::input(format!(
                "{} coefficients for an expanded spectrum of size {expanded_len}",
                self.coeffs.len()
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// data-driven scores
// ---------------------------------------------------------------------------

fn check_labels(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::input(format!("{} labels for a gram matrix of size {n}", y.len())));
    }
    Ok(())
}

/// KARE through a Cholesky factorization of `G/N + λI`.
pub fn kare(y: &[f64], gram: MatRef<'_, f64>, lambda: f64) -> Result<f64> {
    check_ridge(lambda)?;
    let factor = RidgeFactor::new(gram, lambda)?;
    let n = factor.dim() as f64;
    check_labels(y, factor.dim())?;
    let v = factor.solve(y);
    let numerator = linalg::dot(&v, &v) / n;
    let m = factor.inverse_trace() / n;
    Ok(numerator / (m * m))
}

/// `ϱ` through a Cholesky factorization of `G/N + λI`.
pub fn varrho(y: &[f64], gram: MatRef<'_, f64>, lambda: f64) -> Result<f64> {
    check_ridge(lambda)?;
    let factor = RidgeFactor::new(gram, lambda)?;
    check_labels(y, factor.dim())?;
    let v = factor.solve(y);
    let inv = factor.solve_mat(Mat::<f64>::identity(factor.dim(), factor.dim()).as_ref());
    let trace_sq: f64 = (0..inv.ncols())
        .map(|j| (0..inv.nrows()).map(|i| inv[(i, j)] * inv[(i, j)]).sum::<f64>())
        .sum();
    Ok(linalg::dot(&v, &v) / trace_sq)
}

/// Normalized log marginal likelihood through a Cholesky factorization.
pub fn log_marginal_likelihood(y: &[f64], gram: MatRef<'_, f64>, lambda: f64) -> Result<f64> {
    check_ridge(lambda)?;
    let factor = RidgeFactor::new(gram, lambda)?;
    check_labels(y, factor.dim())?;
    let v = factor.solve(y);
    let n = factor.dim() as f64;
    Ok(-(0.5 * linalg::dot(y, &v) + 0.5 * factor.log_det()) / n)
}

/// Classical kernel-target alignment `yᵀGy / (‖G‖_F ‖y‖²)`.
pub fn classical_alignment(y: &[f64], gram: MatRef<'_, f64>) -> Result<f64> {
    let n = linalg::check_square(gram, "gram matrix")?;
    check_labels(y, n)?;
    let y_sq = linalg::dot(y, y);
    if y_sq == 0.0 {
        return Err(Error::input("alignment is undefined for zero labels"));
    }
    let mut frob = 0.0;
    for j in 0..n {
        for i in 0..n {
            frob += gram[(i, j)] * gram[(i, j)];
        }
    }
    if frob == 0.0 {
        return Err(Error::input("alignment is undefined for a zero gram matrix"));
    }
    let gy = linalg::mat_vec(gram, y);
    Ok(linalg::dot(y, &gy) / (frob.sqrt() * y_sq))
}

/// All per-ridge scores of one labelled Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeScores {
    pub lambda: f64,
    pub train_error: f64,
    pub kare: f64,
    pub varrho: f64,
    pub log_likelihood: f64,
    pub sct: SctResult,
}

/// Shares one eigendecomposition of `G/N` across many ridges.
///
/// After construction each [`RidgeEvaluator::scores`] call is O(N).
#[derive(Debug, Clone)]
pub struct RidgeEvaluator {
    eigen: Arc<GramEigen>,
    projected: Vec<f64>,
}

impl RidgeEvaluator {
    pub fn new(eigen: Arc<GramEigen>, y: &[f64]) -> Result<Self> {
        let projected = eigen.project(y)?;
        Ok(RidgeEvaluator { eigen, projected })
    }

    pub fn from_gram(gram: MatRef<'_, f64>, y: &[f64]) -> Result<Self> {
        Self::new(Arc::new(GramEigen::new(gram)?), y)
    }

    pub fn eigen(&self) -> &GramEigen {
        &self.eigen
    }

    /// `(G/N + λI)^{-1} y`.
    pub fn resolvent_labels(&self, lambda: f64) -> Result<Vec<f64>> {
        self.eigen.resolvent_apply_projected(&self.projected, lambda)
    }

    pub fn scores(&self, lambda: f64) -> Result<RidgeScores> {
        check_ridge(lambda)?;
        let spectrum = self.eigen.spectrum();
        let n = spectrum.n() as f64;
        let (mut quad1, mut quad2, mut tr2) = (0.0, 0.0, 0.0);
        for (w, mu) in self.projected.iter().zip(spectrum.eigenvalues()) {
            let r = 1.0 / (mu + lambda);
            quad1 += w * w * r;
            quad2 += w * w * r * r;
            tr2 += r * r;
        }
        let m = spectrum.stieltjes(lambda)?;
        Ok(RidgeScores {
            lambda,
            train_error: lambda * lambda * quad2 / n,
            kare: quad2 / n / (m * m),
            varrho: quad2 / tr2,
            log_likelihood: -(0.5 * quad1 / n + 0.5 * spectrum.mean_log_det(lambda)?),
            sct: sct_from_gram(spectrum, lambda)?,
        })
    }
}

// ---------------------------------------------------------------------------
// theoretical predictions from a population spectrum
// ---------------------------------------------------------------------------

fn expanded_checked(spec: &Spectrum, f: &TrueFunction) -> Result<Vec<f64>> {
    let d = spec.expanded();
    f.check_against(d.len())?;
    Ok(d)
}

/// `‖(I - Ã_ϑ) f*‖²_S = Σ b_k² ϑ²/(ϑ + d_k)²`.
pub fn bias_norm_sq(d: &[f64], b: &[f64], theta: f64) -> f64 {
    d.iter()
        .zip(b)
        .map(|(dk, bk)| {
            let r = theta / (theta + dk);
            bk * bk * r * r
        })
        .sum()
}

/// Expected risk approximation `∂λϑ (‖(I - Ã_ϑ) f*‖²_S + ε²)`.
pub fn theoretical_risk(spec: &Spectrum, f: &TrueFunction, n: u64, lambda: f64) -> Result<f64> {
    let d = expanded_checked(spec, f)?;
    let sct = solve_sct(spec, n, lambda)?;
    Ok(sct.theta_prime * (bias_norm_sq(&d, &f.coeffs, sct.theta) + f.noise * f.noise))
}

/// Expected train error approximation `(λ²/ϑ²) R̃`.
pub fn theoretical_train_error(spec: &Spectrum, f: &TrueFunction, n: u64, lambda: f64) -> Result<f64> {
    let risk = theoretical_risk(spec, f, n, lambda)?;
    let theta = solve_sct(spec, n, lambda)?.theta;
    Ok(lambda * lambda / (theta * theta) * risk)
}

/// Expected predictor coefficients `b_k d_k / (ϑ + d_k)`.
pub fn mean_predictor_coeffs(spec: &Spectrum, f: &TrueFunction, n: u64, lambda: f64) -> Result<Vec<f64>> {
    let d = expanded_checked(spec, f)?;
    let theta = solve_sct(spec, n, lambda)?.theta;
    Ok(d.iter().zip(&f.coeffs).map(|(dk, bk)| bk * dk / (theta + dk)).collect())
}

/// Variance `V_k` of the predictor along the `k`-th expanded eigenfunction.
pub fn predictor_variance_component(
    spec: &Spectrum,
    f: &TrueFunction,
    n: u64,
    lambda: f64,
    k: usize,
) -> Result<f64> {
    let d = expanded_checked(spec, f)?;
    if k >= d.len() {
        return Err(Error::input(format!("index {k} out of range for {} eigenvalues", d.len())));
    }
    let sct = solve_sct(spec, n, lambda)?;
    let theta = sct.theta;
    let dk = d[k];
    let bk = f.coeffs[k];
    let lost = theta / (theta + dk);
    let kept = dk / (theta + dk);
    let inner = bias_norm_sq(&d, &f.coeffs, theta) + f.noise * f.noise + bk * bk * lost * lost;
    Ok(sct.theta_prime / n as f64 * inner * kept * kept)
}

/// Expected risk for a random zero-mean true function with covariance
/// spectrum `sigma_spec`, predicted with kernel spectrum `kernel_spec`
/// (both diagonal in the same basis, entry by entry).
///
/// `B = Nϑ + N∂λϑ(ε²/N - λ) + ∂λϑ ϑ² Σ mult (s_k - d_k)/(d_k + ϑ)²`.
/// With `b_k ~ N(0, s_k)` independently, `B` equals the average of
/// [`theoretical_risk`] over the random true function.
pub fn bayesian_risk(kernel_spec: &Spectrum, sigma_spec: &Spectrum, noise: f64, n: u64, lambda: f64) -> Result<f64> {
    let (ke, se) = (kernel_spec.entries(), sigma_spec.entries());
    if ke.len() != se.len() || ke.iter().zip(se).any(|(a, b)| a.multiplicity != b.multiplicity) {
        return Err(Error::input("kernel and covariance spectra are not aligned entry by entry"));
    }
    let sct = solve_sct(kernel_spec, n, lambda)?;
    let (theta, theta_prime) = (sct.theta, sct.theta_prime);
    let nf = n as f64;
    let shift: f64 = ke
        .iter()
        .zip(se)
        .map(|(k, s)| {
            let denom = k.eigenvalue + theta;
            k.multiplicity as f64 * (s.eigenvalue - k.eigenvalue) / (denom * denom)
        })
        .sum();
    Ok(nf * theta + nf * theta_prime * (noise * noise / nf - lambda) + theta_prime * theta * theta * shift)
}

// ---------------------------------------------------------------------------
// cross-validation
// ---------------------------------------------------------------------------

/// Fold membership: a seeded Fisher–Yates shuffle of `0..n` cut into
/// contiguous blocks; the first `n % folds` blocks get one extra sample.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n {
        return Err(Error::input(format!("folds must be in [2, {n}], got {folds}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream(seed, rng::FOLD_STREAM), &mut order);
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        out.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(out)
}

fn select_rows(x: MatRef<'_, f64>, rows: &[usize]) -> Mat<f64> {
    Mat::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

/// Mean held-out MSE over folds, for every ridge in `lambdas`.
///
/// Each fold's training Gram matrix is decomposed once and reused across ridges.
pub fn cross_validation_curve(
    kernel: &KernelSpec,
    x: MatRef<'_, f64>,
    y: &[f64],
    lambdas: &[f64],
    folds: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::input(format!("{} labels for {n} points", y.len())));
    }
    for &l in lambdas {
        check_ridge(l)?;
    }
    let assignment = fold_assignment(n, folds, seed)?;
    let mut totals = vec![0.0; lambdas.len()];
    for held_out in &assignment {
        let mut is_test = vec![false; n];
        for &i in held_out {
            is_test[i] = true;
        }
        let train_idx: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
        let x_train = select_rows(x, &train_idx);
        let x_test = select_rows(x, held_out);
        let y_train: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();
        let y_test: Vec<f64> = held_out.iter().map(|&i| y[i]).collect();

        let g = gram_matrix(kernel, x_train.as_ref())?;
        let eval = RidgeEvaluator::from_gram(g.as_ref(), &y_train)?;
        let c = cross_gram(kernel, x_test.as_ref(), x_train.as_ref())?;
        let scale = 1.0 / train_idx.len() as f64;
        for (total, &lambda) in totals.iter_mut().zip(lambdas) {
            let dual: Vec<f64> = eval.resolvent_labels(lambda)?.into_iter().map(|v| v * scale).collect();
            let pred = linalg::mat_vec(c.as_ref(), &dual);
            *total += mean_squared_error(&pred, &y_test);
        }
    }
    Ok(totals.into_iter().map(|t| t / folds as f64).collect())
}

/// `folds`-fold cross-validation estimate of the risk at one ridge.
pub fn cross_validation_risk(
    kernel: &KernelSpec,
    x: MatRef<'_, f64>,
    y: &[f64],
    lambda: f64,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    Ok(cross_validation_curve(kernel, x, y, &[lambda], folds, seed)?[0])
}
