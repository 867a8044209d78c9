//! Adaptive mutual trust from local nearest-neighbor cross-validation.
//!
//! For a query point `x`, agent `i` takes the `N` samples of its own data that
//! lie closest to `x`, scores every model `j` (its own included) by mean squared
//! error on them, and turns the row of scores into trust weights proportional to
//! inverse MSE.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, QueryPoint};
use crate::ensemble::{Ensemble, PredictiveModel};
use crate::error::{Error, Result};
use crate::metrics::mse;

/// Row sums of a stochastic matrix must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustConfig {
    /// Local validation set size `N`.
    pub neighbors: usize,
    /// Lower clamp applied to every MSE before inversion.
    pub mse_floor: f64,
}

impl Default for TrustConfig {
    fn default() -> Self {
        TrustConfig {
            neighbors: 5,
            mse_floor: 1e-12,
        }
    }
}

impl TrustConfig {
    pub fn validate(&self) -> Result<()> {
        if self.neighbors == 0 {
            return Err(Error::Config("neighbors must be >= 1".into()));
        }
        if !(self.mse_floor > 0.0) {
            return Err(Error::Config("mse_floor must be > 0".into()));
        }
        Ok(())
    }
}

/// Ranks samples by closeness to a query. Only relative order matters, so
/// implementations may return any monotone transform of the true distance.
pub trait DistanceMetric: Sync {
    fn rank_key(&self, sample: ArrayView1<'_, f64>, query: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl DistanceMetric for Euclidean {
    fn rank_key(&self, sample: ArrayView1<'_, f64>, query: &[f64]) -> f64 {
        sample
            .iter()
            .zip(query)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Indices of the `min(n_neighbors, len)` samples nearest to `x`, ordered by
/// distance with ties going to the lower index.
pub fn nearest_indices<M: DistanceMetric + ?Sized>(
    data: &Dataset,
    x: &QueryPoint,
    n_neighbors: usize,
    metric: &M,
) -> Result<Vec<usize>> {
    if x.dim() != data.dim() {
        return Err(Error::invalid(format!(
            "query has dimension {}, data has {}",
            x.dim(),
            data.dim()
        )));
    }
    if n_neighbors == 0 {
        return Err(Error::invalid("neighbor count must be >= 1"));
    }
    let q = x.coordinates();
    let mut keyed: Vec<(f64, usize)> = (0..data.len())
        .map(|i| (metric.rank_key(data.row(i), q), i))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = n_neighbors.min(keyed.len());
    if k < keyed.len() {
        keyed.select_nth_unstable_by(k - 1, cmp);
        keyed.truncate(k);
    }
    keyed.sort_unstable_by(cmp);
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

/// The `N` nearest samples of `data` to `x` under Euclidean distance. If `N`
/// exceeds the sample count the whole dataset is returned.
pub fn local_validation_set(data: &Dataset, x: &QueryPoint, n_neighbors: usize) -> Result<Dataset> {
    data.select(&nearest_indices(data, x, n_neighbors, &Euclidean)?)
}

/// MSE of each model on `validation`.
pub fn local_mse_row<M: PredictiveModel>(validation: &Dataset, models: &[M]) -> Result<Vec<f64>> {
    if validation.is_empty() {
        return Err(Error::invalid("empty validation set"));
    }
    let labels = validation.labels().as_slice().expect("labels are contiguous");
    models
        .iter()
        .map(|m| mse(&m.predict_all(validation)?, labels))
        .collect()
}

/// Inverse-MSE normalization of one row of scores; each MSE is clamped below
/// at `eps`.
pub fn trust_row(mse_row: &[f64], eps: f64) -> Result<Vec<f64>> {
    if mse_row.is_empty() {
        return Err(Error::invalid("empty MSE row"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("eps must be > 0"));
    }
    if mse_row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("MSE row must be finite and nonnegative"));
    }
    let inv: Vec<f64> = mse_row.iter().map(|m| 1.0 / m.max(eps)).collect();
    let total: f64 = inv.iter().sum();
    if !total.is_finite() {
        return Err(Error::Numerical("trust normalization overflowed".into()));
    }
    Ok(inv.into_iter().map(|v| v / total).collect())
}

/// `scores[[i, j]]` is the MSE of model `j` on agent `i`'s local validation set.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalScoreMatrix(Array2<f64>);

impl LocalScoreMatrix {
    pub fn new(scores: Array2<f64>) -> Result<Self> {
        if !scores.is_square() || scores.is_empty() {
            return Err(Error::invalid("score matrix must be square and non-empty"));
        }
        if scores.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("scores must be finite and nonnegative"));
        }
        Ok(LocalScoreMatrix(scores))
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A strictly positive row-stochastic matrix; `tau[[i, j]]` is agent `i`'s
/// trust in agent `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustMatrix(Array2<f64>);

impl TrustMatrix {
    /// Checks squareness, strict positivity and unit row sums.
    pub fn new(tau: Array2<f64>) -> Result<Self> {
        if !tau.is_square() || tau.is_empty() {
            return Err(Error::invalid("trust matrix must be square and non-empty"));
        }
        if tau.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("trust entries must be finite and > 0"));
        }
        for (i, row) in tau.rows().into_iter().enumerate() {
            let s = row.sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::invalid(format!("row {i} sums to {s}, expected 1")));
            }
        }
        Ok(TrustMatrix(tau))
    }

    /// Divides each row of a strictly positive matrix by its sum.
    pub fn normalized(mut weights: Array2<f64>) -> Result<Self> {
        if weights.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("weights must be finite and > 0"));
        }
        for mut row in weights.rows_mut() {
            let s = row.sum();
            row /= s;
        }
        TrustMatrix::new(weights)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("trust matrix must be square"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        TrustMatrix::new(
            Array2::from_shape_vec((k, k), flat).map_err(|e| Error::invalid(e.to_string()))?,
        )
    }

    pub fn uniform(k: usize) -> Result<Self> {
        TrustMatrix::new(Array2::from_elem((k, k), 1.0 / k as f64))
    }

    pub fn tau(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Builds the trust matrix for query `x`. Row `i` uses agent `i`'s nearest
/// neighbors to `x` and scores all `K` models there. The raw local scores are
/// returned alongside.
pub fn build_trust_matrix<M: PredictiveModel>(
    ensemble: &Ensemble<M>,
    x: &QueryPoint,
    cfg: &TrustConfig,
) -> Result<(TrustMatrix, LocalScoreMatrix)> {
    build_trust_matrix_with(ensemble, x, cfg, &Euclidean)
}

pub fn build_trust_matrix_with<M: PredictiveModel, D: DistanceMetric + ?Sized>(
    ensemble: &Ensemble<M>,
    x: &QueryPoint,
    cfg: &TrustConfig,
    metric: &D,
) -> Result<(TrustMatrix, LocalScoreMatrix)> {
    cfg.validate()?;
    let k = ensemble.len();
    if k < 2 {
        return Err(Error::invalid("trust requires at least 2 agents"));
    }
    let models = ensemble.models();
    let mut scores = Array2::zeros((k, k));
    let mut tau = Array2::zeros((k, k));
    for (i, agent) in ensemble.agents().iter().enumerate() {
        let idx = nearest_indices(&agent.data, x, cfg.neighbors, metric)?;
        let validation = agent.data.select(&idx)?;
        let row = local_mse_row(&validation, &models)?;
        let t = trust_row(&row, cfg.mse_floor)?;
        for j in 0..k {
            scores[[i, j]] = row[j];
            tau[[i, j]] = t[j];
        }
    }
    Ok((TrustMatrix::new(tau)?, LocalScoreMatrix::new(scores)?))
}
