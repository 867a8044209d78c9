//! Local regressors trained by each agent on its private partition.

mod linear;
mod tree;

pub use linear::{fit_lasso, fit_ridge, LassoFit, LinearModel};
pub use tree::{fit_tree, Node, TreeModel};

use ndarray::{Array1, Axis};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::ensemble::PredictiveModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    LeastSquares,
    Ridge,
    Lasso,
    Tree,
}

/// Training recipe for one agent's model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub lambda: f64,
    pub max_depth: usize,
    pub lasso_max_iter: usize,
    pub lasso_tol: f64,
    /// Z-score features before fitting linear models; coefficients are mapped
    /// back to the original scale. Ignored for trees.
    pub standardize: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::LeastSquares,
            lambda: 0.0,
            max_depth: 4,
            lasso_max_iter: 1000,
            lasso_tol: 1e-7,
            standardize: false,
        }
    }
}

impl ModelSpec {
    pub fn least_squares() -> Self {
        Self::default()
    }

    pub fn ridge(lambda: f64) -> Self {
        ModelSpec {
            kind: ModelKind::Ridge,
            lambda,
            ..Self::default()
        }
    }

    pub fn lasso(lambda: f64) -> Self {
        ModelSpec {
            kind: ModelKind::Lasso,
            lambda,
            ..Self::default()
        }
    }

    pub fn tree(max_depth: usize) -> Self {
        ModelSpec {
            kind: ModelKind::Tree,
            max_depth,
            ..Self::default()
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ModelSpec {
            lambda,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be >= 1".into()));
        }
        if self.lasso_max_iter == 0 || !(self.lasso_tol > 0.0) {
            return Err(Error::Config(
                "lasso_max_iter and lasso_tol must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Trains a model on `data`.
    pub fn fit(&self, data: &Dataset) -> Result<FitOutcome> {
        self.validate()?;
        match self.kind {
            ModelKind::Tree => Ok(FitOutcome {
                model: Model::Tree(fit_tree(data, self.max_depth)?),
                converged: true,
            }),
            _ if self.standardize => {
                let scaler = Scaler::new(data);
                let (m, converged) = self.fit_linear(&scaler.transform(data)?)?;
                Ok(FitOutcome {
                    model: Model::Linear(scaler.untransform(&m)?),
                    converged,
                })
            }
            _ => {
                let (m, converged) = self.fit_linear(data)?;
                Ok(FitOutcome {
                    model: Model::Linear(m),
                    converged,
                })
            }
        }
    }

    fn fit_linear(&self, data: &Dataset) -> Result<(LinearModel, bool)> {
        match self.kind {
            ModelKind::LeastSquares => Ok((fit_ridge(data, 0.0)?, true)),
            ModelKind::Ridge => Ok((fit_ridge(data, self.lambda)?, true)),
            ModelKind::Lasso => {
                let f = fit_lasso(data, self.lambda, self.lasso_max_iter, self.lasso_tol)?;
                Ok((f.model, f.converged))
            }
            ModelKind::Tree => unreachable!(),
        }
    }
}

struct Scaler {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Scaler {
    fn new(data: &Dataset) -> Self {
        let mean = data
            .features()
            .mean_axis(Axis(0))
            .unwrap_or_else(|| Array1::zeros(data.dim()));
        let scale = data
            .features()
            .std_axis(Axis(0), 0.0)
            .mapv(|s| if s > 0.0 { s } else { 1.0 });
        Scaler { mean, scale }
    }

    fn transform(&self, data: &Dataset) -> Result<Dataset> {
        let x = (data.features() - &self.mean) / &self.scale;
        Dataset::new(x, data.labels().clone())
    }

    fn untransform(&self, m: &LinearModel) -> Result<LinearModel> {
        let weights: Vec<f64> = m
            .weights
            .iter()
            .zip(self.scale.iter())
            .map(|(w, s)| w / s)
            .collect();
        let shift: f64 = weights.iter().zip(self.mean.iter()).map(|(w, mu)| w * mu).sum();
        LinearModel::new(weights, m.intercept - shift)
    }
}

/// A trained model of any supported kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Linear(LinearModel),
    Tree(TreeModel),
}

impl PredictiveModel for Model {
    fn dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.dim(),
            Model::Tree(m) => m.dim(),
        }
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Linear(m) => m.predict(x),
            Model::Tree(m) => m.predict(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: Model,
    /// False only for lasso runs that exhausted their sweep budget.
    pub converged: bool,
}
