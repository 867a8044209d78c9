//! Trust-weighted consensus for combining regression models trained by
//! agents on heterogeneous local data.
//!
//! Each agent scores every model on its own data points nearest to a query,
//! turns the scores into a row-stochastic trust matrix, and the agents pool
//! their predictions until they agree. The stationary distribution of the
//! trust matrix gives the weight each model receives.
//!
//! ```
//! use degroot::{consensus_predict, ConsensusConfig, TrustMatrix};
//!
//! let t = TrustMatrix::from_rows(&[vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
//! let r = consensus_predict(&[0.0, 1.0], &t, &ConsensusConfig::default()).unwrap();
//! assert!((r.prediction - 5.0 / 14.0).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod consensus;
pub mod data;
pub mod datagen;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod jackknife;
pub mod metrics;
pub mod models;
pub mod trust;

pub use baselines::WeightVector;
pub use consensus::{
    consensus_predict, stationary_weights, BeliefVector, ConsensusConfig, ConsensusMethod,
    ConsensusResult, StationaryWeights,
};
pub use data::{Dataset, QueryPoint};
pub use ensemble::{Agent, Ensemble, PredictiveModel};
pub use error::{Error, Result};
pub use jackknife::{jackknife_se, JackknifeResult};
pub use models::{Model, ModelKind, ModelSpec};
pub use trust::{build_trust_matrix, LocalScoreMatrix, TrustConfig, TrustMatrix};
