//! Hyperparameter sweeps over a lengthscale × ridge grid.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::{DatasetSource, Preprocess, SweepConfig};
use super::{fmt_float, fmt_opt};
use crate::data::{self, CsvOptions, Dataset};
use crate::error::{Error, Result};
use crate::estimators::{classical_alignment, cross_validation_curve, RidgeEvaluator};
use crate::kernels::{cross_gram, gram_matrix, KernelSpec};
use crate::krr::mean_squared_error;
use crate::linalg;
use crate::spectral::GramEigen;

/// Output column order.
pub const SWEEP_HEADER: &str = "lengthscale_over_d,lengthscale,ridge,train_error,kare,varrho,cv_risk,loglik,alignment,test_risk,sct_hat,sct_deriv_hat,seed,n";

/// One grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub lengthscale_over_d: f64,
    pub lengthscale: f64,
    pub ridge: f64,
    pub train_error: f64,
    pub kare: f64,
    pub varrho: f64,
    pub cv_risk: Option<f64>,
    pub loglik: Option<f64>,
    pub alignment: Option<f64>,
    pub test_risk: Option<f64>,
    pub sct_hat: f64,
    pub sct_deriv_hat: f64,
    pub seed: u64,
    pub n: usize,
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        [
            fmt_float(self.lengthscale_over_d),
            fmt_float(self.lengthscale),
            fmt_float(self.ridge),
            fmt_float(self.train_error),
            fmt_float(self.kare),
            fmt_float(self.varrho),
            fmt_opt(self.cv_risk),
            fmt_opt(self.loglik),
            fmt_opt(self.alignment),
            fmt_opt(self.test_risk),
            fmt_float(self.sct_hat),
            fmt_float(self.sct_deriv_hat),
            self.seed.to_string(),
            self.n.to_string(),
        ]
        .join(",")
    }
}

/// Loads, preprocesses and splits the configured dataset.
pub fn load_split(cfg: &SweepConfig) -> Result<(Dataset, Option<Dataset>)> {
    let full = match &cfg.dataset {
        DatasetSource::Synthetic { dim, noise } => data::synthetic_regression(cfg.n + cfg.n_test, *dim, *noise, cfg.seed)?,
        DatasetSource::Csv {
            path,
            label_column,
            features,
            label_map,
            higgs_filter,
        } => {
            let opts = CsvOptions {
                label_column: label_column.clone(),
                feature_columns: features.clone(),
                label_map: label_map.as_deref().map(data::parse_label_map).transpose()?,
                higgs_filter: *higgs_filter,
            };
            data::load_csv(path, &opts)?
        }
        DatasetSource::Mnist { images, labels, digits } => data::load_mnist_idx(images, labels, *digits, (1.0, -1.0))?,
    };
    let full = match cfg.preprocess {
        Preprocess::None => full,
        Preprocess::MaxAbs => data::preprocess_maxabs(&full),
        Preprocess::Mnist => data::preprocess_mnist(&full)?,
    };
    let (train, test) = data::train_test_split(&full, cfg.n, cfg.n_test, cfg.seed)?;
    Ok((train, (cfg.n_test > 0).then_some(test)))
}

/// Scores every grid cell. One Gram eigendecomposition per lengthscale is
/// shared by all ridges; lengthscales run in parallel and records come back
/// in grid order (lengthscale outer, ridge inner).
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    let (train, test) = load_split(cfg)?;
    sweep_dataset(cfg, &train, test.as_ref())
}

/// [`run_sweep`] on an already loaded split.
pub fn sweep_dataset(cfg: &SweepConfig, train: &Dataset, test: Option<&Dataset>) -> Result<Vec<SweepRecord>> {
    let dim = train.dim() as f64;
    let ridges = cfg.ridge.values();
    let multiples = cfg.lengthscale.values();
    let per_scale: Vec<Vec<SweepRecord>> = multiples
        .par_iter()
        .map(|&mult| {
            sweep_lengthscale(cfg, train, test, mult, mult * dim, &ridges)
                .map_err(|e| with_cell_context(e, mult * dim))
        })
        .collect::<Result<_>>()?;
    Ok(per_scale.into_iter().flatten().collect())
}

fn with_cell_context(e: Error, lengthscale: f64) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("lengthscale {lengthscale}: {m}")),
        Error::Input(m) => Error::Input(format!("lengthscale {lengthscale}: {m}")),
        Error::Domain(m) => Error::Domain(format!("lengthscale {lengthscale}: {m}")),
        other => other,
    }
}

fn sweep_lengthscale(
    cfg: &SweepConfig,
    train: &Dataset,
    test: Option<&Dataset>,
    mult: f64,
    lengthscale: f64,
    ridges: &[f64],
) -> Result<Vec<SweepRecord>> {
    let kernel = KernelSpec::new(cfg.kernel, lengthscale)?;
    let x = train.x.as_ref().as_ref();
    let gram = gram_matrix(&kernel, x)?;
    let eval = RidgeEvaluator::new(Arc::new(GramEigen::new(gram.as_ref())?), &train.y)?;
    let alignment = if cfg.alignment {
        Some(classical_alignment(&train.y, gram.as_ref())?)
    } else {
        None
    };
    let cv = if cfg.cv_folds > 0 {
        Some(cross_validation_curve(&kernel, x, &train.y, ridges, cfg.cv_folds, cfg.seed)?)
    } else {
        None
    };
    let cross = test
        .map(|t| cross_gram(&kernel, t.x.as_ref().as_ref(), x))
        .transpose()?;
    let scale = 1.0 / train.len() as f64;

    ridges
        .iter()
        .enumerate()
        .map(|(j, &ridge)| {
            let s = eval.scores(ridge)?;
            let test_risk = match (test, &cross) {
                (Some(t), Some(c)) => {
                    let dual: Vec<f64> = eval.resolvent_labels(ridge)?.into_iter().map(|v| v * scale).collect();
                    Some(mean_squared_error(&linalg::mat_vec(c.as_ref(), &dual), &t.y))
                }
                _ => None,
            };
            Ok(SweepRecord {
                lengthscale_over_d: mult,
                lengthscale,
                ridge,
                train_error: s.train_error,
                kare: s.kare,
                varrho: s.varrho,
                cv_risk: cv.as_ref().map(|c| c[j]),
                loglik: cfg.loglik.then_some(s.log_likelihood),
                alignment,
                test_risk,
                sct_hat: s.sct.theta,
                sct_deriv_hat: s.sct.theta_prime,
                seed: cfg.seed,
                n: train.len(),
            })
        })
        .collect()
}

pub fn write_sweep<W: Write>(records: &[SweepRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()
}

pub fn write_sweep_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_sweep(records, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(extra: &str) -> SweepConfig {
        SweepConfig::parse(&format!(
            "dataset = synthetic\nsynthetic_dim = 2\nn = 10\nn_test = 5\nkernel = rbf\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn single_cell_smoke() {
        let cfg = config("lengthscale = 0:0:1:log2\nridge = -2:-2:1:log10\ncv_folds = 2\n");
        let r = run_sweep(&cfg).unwrap();
        assert_eq!(r.len(), 1);
        let r = &r[0];
        assert_eq!((r.n, r.lengthscale), (10, 2.0));
        for v in [r.train_error, r.kare, r.varrho, r.sct_hat, r.sct_deriv_hat] {
            assert!(v.is_finite());
        }
        assert!(r.cv_risk.unwrap().is_finite() && r.test_risk.unwrap().is_finite());
        assert!(r.kare >= 0.0 && r.sct_hat >= r.ridge && r.sct_deriv_hat >= 1.0);
    }

    #[test]
    fn record_count_and_order() {
        let cfg = config("lengthscale = -1:1:3:log2\nridge = -3:0:4:log10\nloglik = false\n");
        let r = run_sweep(&cfg).unwrap();
        assert_eq!(r.len(), 12);
        assert_eq!(r[4].lengthscale_over_d, 1.0);
        assert_eq!(r[4].ridge, 1e-3);
        assert!(r.iter().all(|x| x.loglik.is_none() && x.cv_risk.is_none()));
    }

    #[test]
    fn csv_output() {
        let cfg = config("lengthscale = 0:0:1:log2\nridge = -2:-1:2:log10\n");
        let r = run_sweep(&cfg).unwrap();
        let mut buf = Vec::new();
        write_sweep(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SWEEP_HEADER);
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), SWEEP_HEADER.split(',').count());
        // cv disabled leaves its column empty
        assert_eq!(lines[1].split(',').nth(6), Some(""));
    }
}
