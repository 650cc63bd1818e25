//! Signal capture threshold curves: exact values from a population spectrum
//! next to estimates from sampled Gram matrices.

use std::io::Write;
use std::path::Path;

use faer::Mat;
use rayon::prelude::*;

use super::{fmt_float, fmt_opt};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec};
use crate::rng;
use crate::sct::{power_law_spectrum, rbf_gaussian_spectrum, sct_from_gram, solve_sct, Spectrum};
use crate::spectral::{decompose, GramSpectrum};
use crate::synthetic::{self, McEstimate};

pub const CURVE_HEADER: &str = "n,ridge,theta,theta_deriv,theta_hat_mean,theta_hat_stderr,theta_deriv_hat_mean,theta_deriv_hat_stderr,theta_rel_err_median,trials";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveSpectrum {
    /// RBF kernel `exp(-‖x-x'‖²/ℓ)` on `N(0, σ² I_dim)` inputs; orders above
    /// `k_max` are dropped from the population spectrum.
    RbfGaussian {
        dim: u32,
        lengthscale: f64,
        sigma: f64,
        k_max: u32,
    },
    /// `d_k = k^{-β}`, `k = 1..=count`, sampled through the Gaussian
    /// observation model.
    PowerLaw { beta: f64, count: usize },
}

impl CurveSpectrum {
    pub fn population(&self) -> Result<Spectrum> {
        match *self {
            CurveSpectrum::RbfGaussian {
                dim,
                lengthscale,
                sigma,
                k_max,
            } => rbf_gaussian_spectrum(dim, lengthscale, sigma, k_max),
            CurveSpectrum::PowerLaw { beta, count } => power_law_spectrum(beta, count),
        }
    }

    /// Spectrum of `G/N` for one sample of `n` points from child stream `stream`.
    pub fn sample_gram(&self, n: usize, seed: u64, stream: u64) -> Result<GramSpectrum> {
        match *self {
            CurveSpectrum::RbfGaussian {
                dim,
                lengthscale,
                sigma,
                ..
            } => {
                let mut r = rng::stream(seed, stream);
                let mut x = Mat::zeros(n, dim as usize);
                for i in 0..n {
                    for j in 0..dim as usize {
                        x[(i, j)] = sigma * rng::standard_normal(&mut r);
                    }
                }
                let g = gram_matrix(&KernelSpec::rbf(lengthscale)?, x.as_ref())?;
                decompose(g.as_ref(), n)
            }
            CurveSpectrum::PowerLaw { .. } => {
                GramSpectrum::from_eigenvalues(synthetic::draw_gram_eigenvalues(&self.population()?, n, seed, stream)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub spectrum: CurveSpectrum,
    pub n_grid: Vec<usize>,
    pub ridges: Vec<f64>,
    /// Sampled Gram matrices per `n`; zero skips the estimates.
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub n: usize,
    pub ridge: f64,
    pub theta: f64,
    pub theta_deriv: f64,
    pub theta_hat: Option<McEstimate>,
    pub theta_deriv_hat: Option<McEstimate>,
    /// Median over samples of `|ϑ - ϑ̂| / ϑ`.
    pub theta_rel_err_median: Option<f64>,
    pub trials: usize,
}

impl CurveRecord {
    pub fn csv_row(&self) -> String {
        [
            self.n.to_string(),
            fmt_float(self.ridge),
            fmt_float(self.theta),
            fmt_float(self.theta_deriv),
            fmt_opt(self.theta_hat.map(|e| e.mean)),
            fmt_opt(self.theta_hat.map(|e| e.stderr)),
            fmt_opt(self.theta_deriv_hat.map(|e| e.mean)),
            fmt_opt(self.theta_deriv_hat.map(|e| e.stderr)),
            fmt_opt(self.theta_rel_err_median),
            self.trials.to_string(),
        ]
        .join(",")
    }
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// Exact `ϑ(λ, N)` and `∂λϑ` for every `(N, λ)` pair, with sample estimates
/// when `trials > 0`. Sample `t` at the `i`-th `N` uses child stream
/// `i·trials + t`. Rows are ordered by `N`, then `λ`.
pub fn run_sct_curves(cfg: &CurveConfig) -> Result<Vec<CurveRecord>> {
    if cfg.n_grid.is_empty() || cfg.ridges.is_empty() {
        return Err(Error::Config("threshold curves need nonempty N and ridge grids".into()));
    }
    if cfg.n_grid.contains(&0) {
        return Err(Error::Config("N values must be positive".into()));
    }
    if cfg.trials == 1 {
        return Err(Error::Config("use zero or at least two trials".into()));
    }
    let population = cfg.spectrum.population()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let samples: Vec<GramSpectrum> = jobs
        .par_iter()
        .map(|&(i, t)| cfg.spectrum.sample_gram(cfg.n_grid[i], cfg.seed, (i * cfg.trials + t) as u64))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(cfg.n_grid.len() * cfg.ridges.len());
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let draws = &samples[i * cfg.trials..(i + 1) * cfg.trials];
        for &ridge in &cfg.ridges {
            let exact = solve_sct(&population, n as u64, ridge)?;
            let (theta_hat, theta_deriv_hat, theta_rel_err_median) = if cfg.trials > 0 {
                let est = draws.iter().map(|g| sct_from_gram(g, ridge)).collect::<Result<Vec<_>>>()?;
                let th: Vec<f64> = est.iter().map(|e| e.theta).collect();
                let dp: Vec<f64> = est.iter().map(|e| e.theta_prime).collect();
                let mut rel: Vec<f64> = th.iter().map(|t| (exact.theta - t).abs() / exact.theta).collect();
                (
                    Some(McEstimate::from_samples(&th)),
                    Some(McEstimate::from_samples(&dp)),
                    Some(median(&mut rel)),
                )
            } else {
                (None, None, None)
            };
            out.push(CurveRecord {
                n,
                ridge,
                theta: exact.theta,
                theta_deriv: exact.theta_prime,
                theta_hat,
                theta_deriv_hat,
                theta_rel_err_median,
                trials: cfg.trials,
            });
        }
    }
    Ok(out)
}

pub fn write_curves<W: Write>(records: &[CurveRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()
}

pub fn write_curves_csv(records: &[CurveRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_curves(records, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power() -> CurveSpectrum {
        CurveSpectrum::PowerLaw { beta: 2.0, count: 30 }
    }

    #[test]
    fn ridge_grid_is_increasing() {
        let cfg = CurveConfig {
            spectrum: power(),
            n_grid: vec![100],
            ridges: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            trials: 0,
            seed: 0,
        };
        let r = run_sct_curves(&cfg).unwrap();
        assert!(r.windows(2).all(|w| w[1].theta > w[0].theta));
        assert!(r.iter().all(|x| x.theta_hat.is_none()));
    }

    #[test]
    fn n_grid_is_decreasing() {
        let cfg = CurveConfig {
            spectrum: CurveSpectrum::RbfGaussian {
                dim: 3,
                lengthscale: 3.0,
                sigma: 1.0,
                k_max: 12,
            },
            n_grid: vec![10, 50, 200, 1000],
            ridges: vec![1e-3],
            trials: 0,
            seed: 0,
        };
        let r = run_sct_curves(&cfg).unwrap();
        assert!(r.windows(2).all(|w| w[1].theta < w[0].theta));
    }

    #[test]
    fn estimates_are_reproducible() {
        let cfg = CurveConfig {
            spectrum: power(),
            n_grid: vec![40, 80],
            ridges: vec![1e-2, 1e-1],
            trials: 3,
            seed: 7,
        };
        let a = run_sct_curves(&cfg).unwrap();
        assert_eq!(a, run_sct_curves(&cfg).unwrap());
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|r| r.theta_rel_err_median.unwrap() < 0.5));
    }

    #[test]
    fn median_of_small_sets() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
