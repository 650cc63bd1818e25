use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent arguments (shapes, empty inputs, bad ranges).
    #[error("input error: {0}")]
    Input(String),

    /// A parameter outside its mathematical domain, e.g. a non-positive ridge.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed (factorization, non-convergence).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A data file could not be parsed; `row` and `column` locate the cell.
    #[error("{}: parse error at row {row}, column '{column}': {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        message: String,
    },

    /// A binary file did not follow its declared format.
    #[error("format error: {0}")]
    Format(String),

    /// Experiment configuration problems.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by input data rather than by configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Format(_) | Error::Io { .. }
        )
    }
}

/// Rejects ridges that are not strictly positive and finite.
pub(crate) fn check_ridge(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "ridge must be positive and finite, got {lambda}"
        )))
    }
}
