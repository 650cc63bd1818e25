//! Gaussian observation model in the kernel eigenbasis and Monte Carlo oracles.
//!
//! With an expanded spectrum `d_1..d_M` and true-function coefficients `b`,
//! a draw of `N` observations is an `N×M` matrix `O` of iid standard normals;
//! the Gram matrix is `G = O diag(d) Oᵀ` and the labels are `y = O b + ε e`.
//! The fitted predictor's coefficients in the eigenbasis are
//!
//! ```text
//! â = (1/N) diag(d) Oᵀ (G/N + λI)⁻¹ y
//! ```
//!
//! and its risk is `‖â - b‖² + ε²`, computed exactly (no test sampling).
//!
//! Trial `t` of a Monte Carlo run with seed `s` draws from child stream `t`
//! of `s` (see [`crate::rng`]), so results do not depend on thread count.

use faer::Mat;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_ridge, Error, Result};
use crate::estimators::TrueFunction;
use crate::linalg::{self, RidgeFactor};
use crate::rng;
use crate::sct::{solve_sct, Spectrum};
use crate::spectral::GramEigen;

/// Largest expanded spectrum the sampler accepts.
pub const MAX_EXPANDED: usize = 5000;

/// One sample of the observation model.
#[derive(Debug, Clone)]
pub struct ObservationDraw {
    /// `N×M` observations of the eigenfunctions.
    pub observations: Mat<f64>,
    pub gram: Mat<f64>,
    pub labels: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl ObservationDraw {
    pub fn n(&self) -> usize {
        self.observations.nrows()
    }
}

/// Expanded eigenvalues, checked against the sampler cap.
pub fn expanded_for_sampling(spec: &Spectrum) -> Result<Vec<f64>> {
    let m = spec.expanded_len();
    if m == 0 {
        return Err(Error::input("cannot sample from an empty spectrum"));
    }
    if m > MAX_EXPANDED as u128 {
        return Err(Error::input(format!(
            "expanded spectrum has {m} entries, more than the sampler limit {MAX_EXPANDED}"
        )));
    }
    Ok(spec.expanded())
}

fn draw_with<R: Rng + ?Sized>(d: &[f64], f: &TrueFunction, n: usize, rng: &mut R) -> (Mat<f64>, Mat<f64>, Vec<f64>) {
    let m = d.len();
    // row-major fill order: O[0,0], O[0,1], ..., then the noise vector
    let mut raw = vec![0.0; n * m];
    for v in raw.iter_mut() {
        *v = rng::standard_normal(rng);
    }
    let o = Mat::from_fn(n, m, |i, k| raw[i * m + k]);
    let noise: Vec<f64> = (0..n).map(|_| rng::standard_normal(rng)).collect();

    let scaled = Mat::from_fn(n, m, |i, k| o[(i, k)] * d[k].sqrt());
    let product = &scaled * scaled.transpose();
    let gram = Mat::from_fn(n, n, |i, j| 0.5 * (product[(i, j)] + product[(j, i)]));

    let mut labels = linalg::mat_vec(o.as_ref(), &f.coeffs);
    for (y, e) in labels.iter_mut().zip(&noise) {
        *y += f.noise * e;
    }
    (o, gram, labels)
}

/// Draws `n` observations from stream `stream` of `seed`.
pub fn draw_stream(spec: &Spectrum, f: &TrueFunction, n: usize, seed: u64, stream: u64) -> Result<ObservationDraw> {
    if n == 0 {
        return Err(Error::input("need at least one observation"));
    }
    let d = expanded_for_sampling(spec)?;
    if f.coeffs.len() != d.len() {
        return Err(Error::input(format!(
            "{} coefficients for an expanded spectrum of size {}",
            f.coeffs.len(),
            d.len()
        )));
    }
    let (observations, gram, labels) = draw_with(&d, f, n, &mut rng::stream(seed, stream));
    Ok(ObservationDraw {
        observations,
        gram,
        labels,
        seed,
        stream,
    })
}

/// Draws `n` observations from stream 0 of `seed`.
pub fn draw(spec: &Spectrum, f: &TrueFunction, n: usize, seed: u64) -> Result<ObservationDraw> {
    draw_stream(spec, f, n, seed, 0)
}

/// Predictor coefficients `â = (1/N) diag(d) Oᵀ (G/N + λI)⁻¹ y` via a Cholesky solve.
pub fn predictor_coeffs(draw: &ObservationDraw, d: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_ridge(lambda)?;
    let factor = RidgeFactor::new(draw.gram.as_ref(), lambda)?;
    let v = factor.solve(&draw.labels);
    let n = draw.n() as f64;
    Ok(linalg::mat_t_vec(draw.observations.as_ref(), &v)
        .into_iter()
        .zip(d)
        .map(|(a, dk)| a * dk / n)
        .collect())
}

/// Exact risk `Σ (â_k - b_k)² + ε²` of the ridge predictor fitted on `draw`.
pub fn exact_risk(draw: &ObservationDraw, spec: &Spectrum, f: &TrueFunction, lambda: f64) -> Result<f64> {
    let d = expanded_for_sampling(spec)?;
    let a = predictor_coeffs(draw, &d, lambda)?;
    Ok(coefficient_risk(&a, f))
}

fn coefficient_risk(a: &[f64], f: &TrueFunction) -> f64 {
    a.iter().zip(&f.coeffs).map(|(x, b)| (x - b) * (x - b)).sum::<f64>() + f.noise * f.noise
}

/// The reconstruction operator `A = (1/N) diag(d) Oᵀ (G/N + λI)⁻¹ O` (`M×M`).
pub fn reconstruction_operator(draw: &ObservationDraw, d: &[f64], lambda: f64) -> Result<Mat<f64>> {
    check_ridge(lambda)?;
    let factor = RidgeFactor::new(draw.gram.as_ref(), lambda)?;
    let solved = factor.solve_mat(draw.observations.as_ref());
    let inner = draw.observations.transpose() * &solved;
    let n = draw.n() as f64;
    Ok(Mat::from_fn(d.len(), d.len(), |k, l| d[k] / n * inner[(k, l)]))
}

/// Per-draw quantities shared across ridges: the Gram eigendecomposition,
/// the projected labels and the projected observations `OᵀV`.
pub struct DrawAnalysis {
    eigen: GramEigen,
    projected_labels: Vec<f64>,
    projected_obs: Mat<f64>,
    d: Vec<f64>,
}

impl DrawAnalysis {
    pub fn new(draw: &ObservationDraw, d: &[f64]) -> Result<Self> {
        let eigen = GramEigen::new(draw.gram.as_ref())?;
        let projected_labels = eigen.project(&draw.labels)?;
        let projected_obs = draw.observations.transpose() * eigen.vectors();
        Ok(DrawAnalysis {
            eigen,
            projected_labels,
            projected_obs,
            d: d.to_vec(),
        })
    }

    pub fn eigen(&self) -> &GramEigen {
        &self.eigen
    }

    fn n(&self) -> f64 {
        self.eigen.n() as f64
    }

    pub fn predictor_coeffs(&self, lambda: f64) -> Vec<f64> {
        let scaled: Vec<f64> = self
            .projected_labels
            .iter()
            .zip(self.eigen.spectrum().eigenvalues())
            .map(|(w, mu)| w / (mu + lambda))
            .collect();
        let raw = linalg::mat_vec(self.projected_obs.as_ref(), &scaled);
        let n = self.n();
        raw.into_iter().zip(&self.d).map(|(a, dk)| a * dk / n).collect()
    }

    /// Entry `A_kl` of the reconstruction operator.
    pub fn operator_entry(&self, k: usize, l: usize, lambda: f64) -> f64 {
        let p = self.projected_obs.as_ref();
        let s: f64 = self
            .eigen
            .spectrum()
            .eigenvalues()
            .iter()
            .enumerate()
            .map(|(i, mu)| p[(k, i)] * p[(l, i)] / (mu + lambda))
            .sum();
        self.d[k] / self.n() * s
    }

    /// `(λ²/N) yᵀ(G/N + λI)⁻² y`.
    pub fn train_error(&self, lambda: f64) -> f64 {
        lambda * lambda * self.quad2(lambda) / self.n()
    }

    /// KARE for this draw.
    pub fn kare(&self, lambda: f64) -> Result<f64> {
        let m = self.eigen.spectrum().stieltjes(lambda)?;
        Ok(self.quad2(lambda) / self.n() / (m * m))
    }

    fn quad2(&self, lambda: f64) -> f64 {
        self.projected_labels
            .iter()
            .zip(self.eigen.spectrum().eigenvalues())
            .map(|(w, mu)| {
                let r = 1.0 / (mu + lambda);
                w * w * r * r
            })
            .sum()
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl McEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let t = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / t;
        if samples.len() < 2 {
            return McEstimate { mean, stderr: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
        McEstimate {
            mean,
            stderr: (var / t).sqrt(),
        }
    }

    /// `|mean - target| ≤ max(k·stderr, rel·|target|)`.
    pub fn agrees_with(&self, target: f64, k_stderr: f64, rel: f64) -> bool {
        (self.mean - target).abs() <= (k_stderr * self.stderr).max(rel * target.abs())
    }
}

/// Sample variance with an estimate of its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceEstimate {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

impl VarianceEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let t = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / t;
        let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / t;
        let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / t;
        let variance = m2 * t / (t - 1.0);
        // Var(s²) ≈ (μ₄ - σ⁴(T-3)/(T-1)) / T
        let var_of_var = ((m4 - variance * variance * (t - 3.0) / (t - 1.0)) / t).max(0.0);
        VarianceEstimate {
            mean,
            variance,
            stderr: var_of_var.sqrt(),
        }
    }
}

/// Per-ridge Monte Carlo summary over independent draws.
#[derive(Debug, Clone)]
pub struct RiskStudy {
    pub lambda: f64,
    pub risk: McEstimate,
    pub train_error: McEstimate,
    pub kare: McEstimate,
    pub risk_samples: Vec<f64>,
    pub train_samples: Vec<f64>,
    pub kare_samples: Vec<f64>,
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::input("Monte Carlo needs at least two trials"));
    }
    Ok(())
}

/// Exact risk, train error and KARE over `trials` draws, for every ridge.
pub fn mc_risk_study(
    spec: &Spectrum,
    f: &TrueFunction,
    n: usize,
    lambdas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<RiskStudy>> {
    check_trials(trials)?;
    for &l in lambdas {
        check_ridge(l)?;
    }
    let d = expanded_for_sampling(spec)?;
    let per_trial: Vec<Vec<(f64, f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<(f64, f64, f64)>> {
            let draw = draw_stream(spec, f, n, seed, t)?;
            let analysis = DrawAnalysis::new(&draw, &d)?;
            lambdas
                .iter()
                .map(|&lambda| {
                    let a = analysis.predictor_coeffs(lambda);
                    Ok((coefficient_risk(&a, f), analysis.train_error(lambda), analysis.kare(lambda)?))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(j, &lambda)| {
            let risk_samples: Vec<f64> = per_trial.iter().map(|r| r[j].0).collect();
            let train_samples: Vec<f64> = per_trial.iter().map(|r| r[j].1).collect();
            let kare_samples: Vec<f64> = per_trial.iter().map(|r| r[j].2).collect();
            RiskStudy {
                lambda,
                risk: McEstimate::from_samples(&risk_samples),
                train_error: McEstimate::from_samples(&train_samples),
                kare: McEstimate::from_samples(&kare_samples),
                risk_samples,
                train_samples,
                kare_samples,
            }
        })
        .collect())
}

/// Monte Carlo mean and standard error of the exact risk.
pub fn mc_expected_risk(
    spec: &Spectrum,
    f: &TrueFunction,
    n: usize,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    Ok(mc_risk_study(spec, f, n, &[lambda], trials, seed)?[0].risk)
}

/// Monte Carlo moments of the reconstruction operator.
#[derive(Debug, Clone)]
pub struct OperatorMoments {
    pub indices: Vec<usize>,
    /// Mean and variance of `A_kk` for each requested index.
    pub diagonal: Vec<VarianceEstimate>,
    /// `((k, l), estimate)` for every ordered pair of distinct requested indices.
    pub off_diagonal: Vec<((usize, usize), McEstimate)>,
    /// `|1/ϑ - m_G(-λ)|` over draws.
    pub stieltjes_gap: McEstimate,
    pub stieltjes_gap_samples: Vec<f64>,
    /// Exact `ϑ(λ, N)`.
    pub theta: f64,
}

/// Monte Carlo moments of `A_kl` for the requested indices. Labels are not
/// needed, so the draw uses zero coefficients and no noise.
pub fn mc_operator_moments(
    spec: &Spectrum,
    n: usize,
    lambda: f64,
    trials: usize,
    seed: u64,
    indices: &[usize],
) -> Result<OperatorMoments> {
    check_trials(trials)?;
    check_ridge(lambda)?;
    let d = expanded_for_sampling(spec)?;
    if let Some(&bad) = indices.iter().find(|&&k| k >= d.len()) {
        return Err(Error::input(format!("index {bad} out of range for {} eigenvalues", d.len())));
    }
    let theta = solve_sct(spec, n as u64, lambda)?.theta;
    let silent = TrueFunction::new(vec![0.0; d.len()], 0.0)?;
    let pairs: Vec<(usize, usize)> = indices
        .iter()
        .flat_map(|&k| indices.iter().filter(move |&&l| l != k).map(move |&l| (k, l)))
        .collect();

    let per_trial: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let draw = draw_stream(spec, &silent, n, seed, t)?;
            let analysis = DrawAnalysis::new(&draw, &d)?;
            let diag = indices.iter().map(|&k| analysis.operator_entry(k, k, lambda)).collect();
            let off = pairs.iter().map(|&(k, l)| analysis.operator_entry(k, l, lambda)).collect();
            let m = analysis.eigen().spectrum().stieltjes(lambda)?;
            Ok((diag, off, (1.0 / theta - m).abs()))
        })
        .collect::<Result<_>>()?;

    let diagonal = (0..indices.len())
        .map(|j| VarianceEstimate::from_samples(&per_trial.iter().map(|r| r.0[j]).collect::<Vec<_>>()))
        .collect();
    let off_diagonal = pairs
        .iter()
        .enumerate()
        .map(|(j, &pair)| (pair, McEstimate::from_samples(&per_trial.iter().map(|r| r.1[j]).collect::<Vec<_>>())))
        .collect();
    let gaps: Vec<f64> = per_trial.iter().map(|r| r.2).collect();
    Ok(OperatorMoments {
        indices: indices.to_vec(),
        diagonal,
        off_diagonal,
        stieltjes_gap: McEstimate::from_samples(&gaps),
        stieltjes_gap_samples: gaps,
        theta,
    })
}

/// Monte Carlo mean and variance of the predictor coefficients `â_k`.
pub fn mc_coefficient_moments(
    spec: &Spectrum,
    f: &TrueFunction,
    n: usize,
    lambda: f64,
    trials: usize,
    seed: u64,
    indices: &[usize],
) -> Result<Vec<VarianceEstimate>> {
    check_trials(trials)?;
    check_ridge(lambda)?;
    let d = expanded_for_sampling(spec)?;
    if let Some(&bad) = indices.iter().find(|&&k| k >= d.len()) {
        return Err(Error::input(format!("index {bad} out of range for {} eigenvalues", d.len())));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let draw = draw_stream(spec, f, n, seed, t)?;
            let a = DrawAnalysis::new(&draw, &d)?.predictor_coeffs(lambda);
            Ok(indices.iter().map(|&k| a[k]).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..indices.len())
        .map(|j| VarianceEstimate::from_samples(&per_trial.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect())
}

/// Exact risk of a draw where the true function itself is random:
/// `b_k ~ N(0, s_k)` drawn from the same child stream before the observations.
pub fn mc_bayesian_risk(
    kernel_spec: &Spectrum,
    sigma_spec: &Spectrum,
    noise: f64,
    n: usize,
    lambda: f64,
    trials: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_trials(trials)?;
    check_ridge(lambda)?;
    let d = expanded_for_sampling(kernel_spec)?;
    let s = expanded_for_sampling(sigma_spec)?;
    if s.len() != d.len() {
        return Err(Error::input("kernel and covariance spectra differ in size"));
    }
    let risks: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = rng::stream(seed, t);
            let coeffs: Vec<f64> = s.iter().map(|sk| sk.sqrt() * rng::standard_normal(&mut rng)).collect();
            let f = TrueFunction::new(coeffs, noise)?;
            let (observations, gram, labels) = draw_with(&d, &f, n, &mut rng);
            let draw = ObservationDraw {
                observations,
                gram,
                labels,
                seed,
                stream: t,
            };
            let a = DrawAnalysis::new(&draw, &d)?.predictor_coeffs(lambda);
            Ok(coefficient_risk(&a, &f))
        })
        .collect::<Result<_>>()?;
    Ok(McEstimate::from_samples(&risks))
}

/// Gram eigenvalues of one draw, for Stieltjes estimates.
pub fn draw_gram_eigenvalues(spec: &Spectrum, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    let d = expanded_for_sampling(spec)?;
    let silent = TrueFunction::new(vec![0.0; d.len()], 0.0)?;
    let draw = draw_stream(spec, &silent, n, seed, stream)?;
    Ok(crate::spectral::decompose(draw.gram.as_ref(), n)?.eigenvalues().to_vec())
}
