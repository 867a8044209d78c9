//! Labeled datasets and query points.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// A labeled feature matrix owned by a single agent.
///
/// Rows are samples and columns are input dimensions. The constructor checks
/// that there is at least one row, that the label count matches, and that every
/// value is finite. A `Dataset` is never mutated after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array1<f64>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::invalid("dataset must contain at least one sample"));
        }
        if features.nrows() != labels.len() {
            return Err(Error::invalid(format!(
                "feature rows ({}) != label count ({})",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some((i, _)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let d = features.ncols().max(1);
            return Err(Error::invalid(format!(
                "non-finite feature at row {}, column {}",
                i / d,
                i % d
            )));
        }
        if let Some(i) = labels.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite label at row {i}")));
        }
        Ok(Dataset { features, labels })
    }

    /// Builds a dataset from row vectors. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>], labels: &[f64]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::invalid(format!(
                "row {i} has {} columns, expected {d}",
                rows[i].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let features = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::invalid(e.to_string()))?;
        Dataset::new(features, Array1::from(labels.to_vec()))
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array1<f64> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false; a valid dataset has at least one sample.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// Rows in the given order. Indices may repeat.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::invalid("cannot select an empty subset"));
        }
        if let Some(&i) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!(
                "row index {i} out of range for {} samples",
                self.len()
            )));
        }
        Ok(Dataset {
            features: self.features.select(Axis(0), indices),
            labels: self.labels.select(Axis(0), indices),
        })
    }

    /// Concatenates datasets with equal feature dimension.
    pub fn concat(parts: &[&Dataset]) -> Result<Dataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("cannot concatenate zero datasets"))?;
        if parts.iter().any(|p| p.dim() != first.dim()) {
            return Err(Error::invalid("datasets differ in feature dimension"));
        }
        let fviews: Vec<_> = parts.iter().map(|p| p.features.view()).collect();
        let lviews: Vec<_> = parts.iter().map(|p| p.labels.view()).collect();
        let features =
            ndarray::concatenate(Axis(0), &fviews).map_err(|e| Error::invalid(e.to_string()))?;
        let labels =
            ndarray::concatenate(Axis(0), &lviews).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Dataset { features, labels })
    }
}

/// A finite point in input space at which the ensemble is queried.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPoint(Vec<f64>);

impl QueryPoint {
    pub fn new(coordinates: Vec<f64>) -> Result<Self> {
        if let Some(i) = coordinates.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate at index {i}")));
        }
        Ok(QueryPoint(coordinates))
    }

    pub fn from_view(row: ArrayView1<'_, f64>) -> Result<Self> {
        QueryPoint::new(row.to_vec())
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl AsRef<[f64]> for QueryPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
