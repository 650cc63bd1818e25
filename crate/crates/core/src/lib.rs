//! Kernel ridge regression diagnostics: signal capture thresholds, spectral
//! risk estimators, synthetic Gaussian-design experiments and data loaders.

pub mod error;
pub mod cli;
pub mod data;
pub mod estimators;
pub mod kernels;
pub mod krr;
mod linalg;
pub mod rng;
pub mod sct;
pub mod spectral;
pub mod synthetic;

pub use faer;

pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelSpec};
pub use krr::Predictor;
pub use sct::{solve_sct, SctResult, Spectrum};
pub use spectral::{GramEigen, GramSpectrum};
