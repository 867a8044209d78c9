//! Least-squares, ridge and lasso fits of an affine model.
//!
//! All fits leave the intercept unpenalized by working on centered features and
//! labels and recovering the intercept as `mean(y) - mean(x) . w`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::{Array1, Axis};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::ensemble::{check_dim, PredictiveModel};
use crate::error::{Error, Result};

/// Relative eigenvalue cutoff below which a direction counts as null space
/// when no ridge penalty is applied.
const RANK_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, intercept: f64) -> Result<Self> {
        if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numerical("non-finite linear model parameters".into()));
        }
        Ok(LinearModel { weights, intercept })
    }

    pub fn l1_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.abs()).sum()
    }
}

impl PredictiveModel for LinearModel {
    fn dim(&self) -> usize {
        self.weights.len()
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.weights.len(), x.len())?;
        Ok(self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }
}

struct Centered {
    x: ndarray::Array2<f64>,
    y: Array1<f64>,
    x_mean: Array1<f64>,
    y_mean: f64,
}

fn center(data: &Dataset) -> Centered {
    let x_mean = data
        .features()
        .mean_axis(Axis(0))
        .unwrap_or_else(|| Array1::zeros(data.dim()));
    let y_mean = data.labels().mean().unwrap_or(0.0);
    Centered {
        x: data.features() - &x_mean,
        y: data.labels() - y_mean,
        x_mean,
        y_mean,
    }
}

fn assemble(c: &Centered, weights: Vec<f64>) -> Result<LinearModel> {
    let shift: f64 = weights.iter().zip(c.x_mean.iter()).map(|(w, m)| w * m).sum();
    LinearModel::new(weights, c.y_mean - shift)
}

/// Minimizes `||y - Xw - b||^2 + lambda ||w||^2` with `b` unpenalized.
///
/// Solved through the eigendecomposition of the centered Gram matrix. With
/// `lambda = 0` directions with (numerically) zero eigenvalue are dropped,
/// which yields the minimum-norm least-squares solution.
pub fn fit_ridge(data: &Dataset, lambda: f64) -> Result<LinearModel> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    let c = center(data);
    let d = data.dim();
    if d == 0 {
        return assemble(&c, Vec::new());
    }
    let xt_x = c.x.t().dot(&c.x);
    let xt_y = c.x.t().dot(&c.y);
    let gram = DMatrix::from_fn(d, d, |i, j| xt_x[[i, j]]);
    let rhs = DVector::from_iterator(d, xt_y.iter().copied());

    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Gram eigendecomposition did not converge".into()))?;
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    let cutoff = RANK_RTOL * max_eig.max(f64::MIN_POSITIVE);

    let mut w = DVector::<f64>::zeros(d);
    for k in 0..d {
        let e = eig.eigenvalues[k];
        let denom = e + lambda;
        if lambda == 0.0 && e <= cutoff {
            continue;
        }
        if denom <= 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        let coef = v.dot(&rhs) / denom;
        w += v * coef;
    }
    assemble(&c, w.iter().copied().collect())
}

/// Result of a coordinate-descent lasso run.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub model: LinearModel,
    pub converged: bool,
    pub sweeps: usize,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Minimizes `(1 / 2n) ||y - Xw - b||^2 + lambda ||w||_1` by cyclic coordinate
/// descent in ascending feature order.
///
/// Stops once a full sweep changes no coordinate by more than `tol`, or after
/// `max_iter` sweeps. A run that hits the sweep limit still returns its last
/// iterate with `converged = false`.
pub fn fit_lasso(data: &Dataset, lambda: f64, max_iter: usize, tol: f64) -> Result<LassoFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("lasso max_iter must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("lasso tol must be positive"));
    }
    let c = center(data);
    let n = data.len() as f64;
    let d = data.dim();
    let col_sq: Vec<f64> = (0..d)
        .map(|j| c.x.column(j).iter().map(|v| v * v).sum::<f64>() / n)
        .collect();

    let mut w = vec![0.0; d];
    let mut resid = c.y.clone();
    let mut converged = d == 0;
    let mut sweeps = 0;
    while !converged && sweeps < max_iter {
        sweeps += 1;
        let mut max_delta = 0.0f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let col = c.x.column(j);
            let rho = col.dot(&resid) / n + col_sq[j] * w[j];
            let new = soft_threshold(rho, lambda) / col_sq[j];
            let delta = new - w[j];
            if delta != 0.0 {
                resid.scaled_add(-delta, &col);
                w[j] = new;
            }
            max_delta = max_delta.max(delta.abs());
        }
        if !max_delta.is_finite() {
            return Err(Error::Numerical("lasso coordinate descent diverged".into()));
        }
        converged = max_delta <= tol;
    }
    Ok(LassoFit {
        model: assemble(&c, w)?,
        converged,
        sweeps,
    })
}
