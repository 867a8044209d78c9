use crate::data::{Dataset, QueryPoint};
use crate::error::{Error, Result};

/// A trained regressor exposing a pure point prediction.
pub trait PredictiveModel {
    /// Input dimension the model was trained on.
    fn dim(&self) -> usize;

    /// Predicts at `x`. Implementations must be deterministic and must reject
    /// inputs whose length differs from [`dim`](Self::dim).
    fn predict(&self, x: &[f64]) -> Result<f64>;

    fn predict_point(&self, x: &QueryPoint) -> Result<f64> {
        self.predict(x.coordinates())
    }

    /// Predictions for every row of `data`.
    fn predict_all(&self, data: &Dataset) -> Result<Vec<f64>> {
        let features = data.features();
        features
            .rows()
            .into_iter()
            .map(|row| match row.as_slice() {
                Some(s) => self.predict(s),
                None => self.predict(&row.to_vec()),
            })
            .collect()
    }
}

impl<M: PredictiveModel + ?Sized> PredictiveModel for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        (**self).predict(x)
    }
}

impl<M: PredictiveModel + ?Sized> PredictiveModel for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        (**self).predict(x)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::invalid(format!(
            "dimension mismatch: model expects {expected}, got {got}"
        )));
    }
    Ok(())
}

/// One participant: a private dataset and the model trained on it.
#[derive(Debug, Clone)]
pub struct Agent<M> {
    pub data: Dataset,
    pub model: M,
}

/// An ordered collection of at least two agents sharing one feature dimension.
#[derive(Debug, Clone)]
pub struct Ensemble<M> {
    agents: Vec<Agent<M>>,
}

impl<M: PredictiveModel> Ensemble<M> {
    pub fn new(agents: Vec<Agent<M>>) -> Result<Self> {
        if agents.len() < 2 {
            return Err(Error::invalid(format!(
                "an ensemble needs at least 2 agents, got {}",
                agents.len()
            )));
        }
        let d = agents[0].data.dim();
        for (k, a) in agents.iter().enumerate() {
            if a.data.dim() != d || a.model.dim() != d {
                return Err(Error::invalid(format!(
                    "agent {k} has dimension data={} model={}, expected {d}",
                    a.data.dim(),
                    a.model.dim()
                )));
            }
        }
        Ok(Ensemble { agents })
    }

    pub fn agents(&self) -> &[Agent<M>] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.agents[0].data.dim()
    }

    pub fn models(&self) -> Vec<&M> {
        self.agents.iter().map(|a| &a.model).collect()
    }

    /// Each agent's own prediction at `x`, in agent order.
    pub fn predictions(&self, x: &QueryPoint) -> Result<Vec<f64>> {
        self.agents.iter().map(|a| a.model.predict_point(x)).collect()
    }
}
