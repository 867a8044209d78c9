//! Comparison aggregation schemes: equal averaging, inverse-MSE weighting on a
//! shared validation set (global or around the query), and two one-shot
//! collapses of the trust and score matrices.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, QueryPoint};
use crate::ensemble::PredictiveModel;
use crate::error::{Error, Result};
use crate::trust::{local_mse_row, local_validation_set, LocalScoreMatrix, TrustMatrix, ROW_SUM_TOL};

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("empty weight vector"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {s}, expected 1")));
        }
        Ok(WeightVector(weights))
    }

    pub fn uniform(k: usize) -> Result<Self> {
        WeightVector::new(vec![1.0 / k as f64; k])
    }

    fn inverse(values: &[f64], eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid("eps must be > 0"));
        }
        let inv: Vec<f64> = values.iter().map(|v| 1.0 / v.max(eps)).collect();
        let total: f64 = inv.iter().sum();
        WeightVector::new(inv.into_iter().map(|v| v / total).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `sum_j w_j p_j`.
    pub fn combine(&self, predictions: &[f64]) -> Result<f64> {
        if predictions.len() != self.0.len() {
            return Err(Error::invalid("prediction count does not match weights"));
        }
        Ok(self.0.iter().zip(predictions).map(|(w, p)| w * p).sum())
    }
}

/// Equally weighted model average.
pub fn mean_average(predictions: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::invalid("mean of empty predictions"));
    }
    Ok(predictions.iter().sum::<f64>() / predictions.len() as f64)
}

/// Inverse-MSE weights from each model's error on the full validation set.
pub fn cv_static_weights<M: PredictiveModel>(
    models: &[M],
    validation: &Dataset,
    eps: f64,
) -> Result<WeightVector> {
    WeightVector::inverse(&local_mse_row(validation, models)?, eps)
}

/// Inverse-MSE weights from each model's error on the `n_neighbors`
/// validation points nearest to `x`.
pub fn cv_adaptive_weights<M: PredictiveModel>(
    models: &[M],
    validation: &Dataset,
    x: &QueryPoint,
    n_neighbors: usize,
    eps: f64,
) -> Result<WeightVector> {
    let local = local_validation_set(validation, x, n_neighbors)?;
    WeightVector::inverse(&local_mse_row(&local, models)?, eps)
}

/// Column means of the trust matrix.
pub fn tau_average_weights(t: &TrustMatrix) -> Result<WeightVector> {
    let k = t.len() as f64;
    let cols: Vec<f64> = t.tau().columns().into_iter().map(|c| c.sum() / k).collect();
    let total: f64 = cols.iter().sum();
    WeightVector::new(cols.into_iter().map(|c| c / total).collect())
}

/// Inverse of each model's summed local MSE across all agents, normalized.
pub fn mse_average_weights(scores: &LocalScoreMatrix, eps: f64) -> Result<WeightVector> {
    let sums: Vec<f64> = scores.scores().columns().into_iter().map(|c| c.sum()).collect();
    WeightVector::inverse(&sums, eps)
}
