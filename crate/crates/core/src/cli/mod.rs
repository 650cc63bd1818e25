//! Experiment driver: hyperparameter sweeps, threshold curves and the
//! validation suites, plus the command-line front end.

pub mod app;
pub mod config;
pub mod curves;
pub mod sweep;
pub mod validation;

pub use config::{Grid, GridScale, SweepConfig};
pub use curves::{run_sct_curves, CurveConfig, CurveRecord, CurveSpectrum};
pub use sweep::{run_sweep, write_sweep_csv, SweepRecord, SWEEP_HEADER};
pub use validation::{run_validation, SuiteReport, ValidationReport, SUITES};

/// Floats in output tables: 17 significant digits.
pub(crate) fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}
