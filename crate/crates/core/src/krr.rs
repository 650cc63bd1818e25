//! Kernel ridge regression with the `1/N`-normalized ridge:
//! `f̂(x) = (1/N) K(x, X) (G/N + λI)^{-1} y`.

use std::sync::Arc;

use faer::{Mat, MatRef};

use crate::error::{check_ridge, Error, Result};
use crate::kernels::{cross_gram, gram_matrix, KernelSpec};
use crate::linalg::{self, RidgeFactor};

/// A fitted predictor. The training inputs are shared, not copied.
#[derive(Debug, Clone)]
pub struct Predictor {
    kernel: KernelSpec,
    x_train: Arc<Mat<f64>>,
    lambda: f64,
    dual: Vec<f64>,
}

impl Predictor {
    /// Builds a predictor from an already computed dual vector
    /// `dual = (1/N)(G/N + λI)^{-1} y`.
    pub fn from_dual(kernel: KernelSpec, x_train: Arc<Mat<f64>>, lambda: f64, dual: Vec<f64>) -> Result<Self> {
        check_ridge(lambda)?;
        if dual.len() != x_train.nrows() {
            return Err(Error::input(format!(
                "dual length {} does not match {} training points",
                dual.len(),
                x_train.nrows()
            )));
        }
        Ok(Predictor {
            kernel,
            x_train,
            lambda,
            dual,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dual(&self) -> &[f64] {
        &self.dual
    }

    pub fn x_train(&self) -> &Arc<Mat<f64>> {
        &self.x_train
    }

    pub fn n(&self) -> usize {
        self.dual.len()
    }

    /// `K(X_test, X) · dual`.
    pub fn predict(&self, x_test: MatRef<'_, f64>) -> Result<Vec<f64>> {
        let c = cross_gram(&self.kernel, x_test, self.x_train.as_ref().as_ref())?;
        Ok(linalg::mat_vec(c.as_ref(), &self.dual))
    }

    /// `(1/N)‖ŷ_train - y‖²`, predicting on the training inputs.
    pub fn train_error(&self, y: &[f64]) -> Result<f64> {
        self.check_labels(y)?;
        let pred = self.predict(self.x_train.as_ref().as_ref())?;
        Ok(mean_squared_error(&pred, y))
    }

    /// `(λ²/N) yᵀ(G/N + λI)^{-2} y`, using `y - ŷ = λ(G/N + λI)^{-1} y = λN·dual`.
    pub fn train_error_closed_form(&self, y: &[f64]) -> Result<f64> {
        self.check_labels(y)?;
        let n = self.n() as f64;
        let sq: f64 = self.dual.iter().map(|a| a * a).sum();
        Ok(self.lambda * self.lambda * n * sq)
    }

    /// Held-out mean squared error.
    pub fn test_risk(&self, x_test: MatRef<'_, f64>, y_test: &[f64]) -> Result<f64> {
        if x_test.nrows() == 0 {
            return Err(Error::input("test set is empty"));
        }
        if y_test.len() != x_test.nrows() {
            return Err(Error::input(format!(
                "{} test labels for {} test points",
                y_test.len(),
                x_test.nrows()
            )));
        }
        let pred = self.predict(x_test)?;
        Ok(mean_squared_error(&pred, y_test))
    }

    fn check_labels(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::input(format!(
                "{} labels for {} training points",
                y.len(),
                self.n()
            )));
        }
        Ok(())
    }
}

pub(crate) fn mean_squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / a.len() as f64
}

/// Fits the ridge predictor through a Cholesky factorization of `G/N + λI`.
pub fn fit(kernel: &KernelSpec, x: Arc<Mat<f64>>, y: &[f64], lambda: f64) -> Result<Predictor> {
    check_ridge(lambda)?;
    let n = x.nrows();
    if n == 0 {
        return Err(Error::input("no training points"));
    }
    if y.len() != n {
        return Err(Error::input(format!("{} labels for {n} training points", y.len())));
    }
    let g = gram_matrix(kernel, x.as_ref().as_ref())?;
    let factor = RidgeFactor::new(g.as_ref(), lambda)?;
    let scale = 1.0 / n as f64;
    let dual = factor.solve(y).into_iter().map(|v| v * scale).collect();
    Predictor::from_dual(*kernel, x, lambda, dual)
}

pub fn predict(p: &Predictor, x_test: MatRef<'_, f64>) -> Result<Vec<f64>> {
    p.predict(x_test)
}

pub fn train_error(p: &Predictor, y: &[f64]) -> Result<f64> {
    p.train_error(y)
}

pub fn test_risk(p: &Predictor, x_test: MatRef<'_, f64>, y_test: &[f64]) -> Result<f64> {
    p.test_risk(x_test, y_test)
}
