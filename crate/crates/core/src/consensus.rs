//! DeGroot consensus: repeated trust-weighted pooling of beliefs and its
//! closed form through the stationary distribution of the trust matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trust::TrustMatrix;

/// Beliefs of all agents after `round` pooling steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefVector {
    pub beliefs: Vec<f64>,
    pub round: usize,
}

impl BeliefVector {
    pub fn initial(predictions: &[f64]) -> Result<Self> {
        check_finite(predictions)?;
        Ok(BeliefVector {
            beliefs: predictions.to_vec(),
            round: 0,
        })
    }

    /// `max - min` over agents.
    pub fn spread(&self) -> f64 {
        let (lo, hi) = min_max(&self.beliefs);
        hi - lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsensusMethod {
    /// Synchronous belief pooling; the answer is the mean of the final beliefs.
    Pooling,
    /// Stationary weights by power iteration, then a weighted average of the
    /// initial predictions.
    PowerIteration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConsensusConfig {
    pub max_rounds: usize,
    pub tolerance: f64,
    pub method: ConsensusMethod,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        ConsensusConfig {
            max_rounds: 30,
            tolerance: 1e-10,
            method: ConsensusMethod::PowerIteration,
        }
    }
}

impl ConsensusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryWeights {
    pub weights: Vec<f64>,
    pub rounds: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    pub prediction: f64,
    /// Stationary weights of the trust matrix, whichever method ran.
    pub weights: Vec<f64>,
    pub rounds_run: usize,
    pub converged: bool,
    /// Per-round beliefs; only recorded by the pooling method.
    pub trace: Option<Vec<BeliefVector>>,
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("predictions must be finite"));
    }
    Ok(())
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// One synchronous update: `b_i <- sum_j tau_ij b_j`.
pub fn pool_step(beliefs: &BeliefVector, t: &TrustMatrix) -> Result<BeliefVector> {
    if beliefs.beliefs.len() != t.len() {
        return Err(Error::invalid(format!(
            "{} beliefs for a {}-agent trust matrix",
            beliefs.beliefs.len(),
            t.len()
        )));
    }
    let next = t
        .tau()
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(&beliefs.beliefs).map(|(w, b)| w * b).sum())
        .collect();
    Ok(BeliefVector {
        beliefs: next,
        round: beliefs.round + 1,
    })
}

/// Left eigenvector `w T = w` with `sum w = 1`, by power iteration from the
/// uniform vector. Iteration stops when the L1 change of one step is at most
/// `cfg.tolerance`, or after `cfg.max_rounds` steps with `converged = false`.
pub fn stationary_weights(t: &TrustMatrix, cfg: &ConsensusConfig) -> Result<StationaryWeights> {
    cfg.validate()?;
    let k = t.len();
    let tau = t.tau();
    let mut w = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    let mut rounds = 0;
    let mut converged = false;
    while rounds < cfg.max_rounds {
        rounds += 1;
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in tau.rows().into_iter().enumerate() {
            let wi = w[i];
            for (n, &tij) in next.iter_mut().zip(row.iter()) {
                *n += wi * tij;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change: f64 = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut w, &mut next);
        if !change.is_finite() {
            return Err(Error::Numerical("power iteration produced non-finite weights".into()));
        }
        if change <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ok(StationaryWeights {
        weights: w,
        rounds,
        converged,
    })
}

fn weighted(weights: &[f64], predictions: &[f64]) -> f64 {
    let (lo, hi) = min_max(predictions);
    let p: f64 = weights.iter().zip(predictions).map(|(w, p)| w * p).sum();
    p.clamp(lo, hi)
}

/// Collective prediction from the agents' initial `predictions`.
pub fn consensus_predict(
    predictions: &[f64],
    t: &TrustMatrix,
    cfg: &ConsensusConfig,
) -> Result<ConsensusResult> {
    cfg.validate()?;
    if predictions.len() != t.len() {
        return Err(Error::invalid(format!(
            "{} predictions for a {}-agent trust matrix",
            predictions.len(),
            t.len()
        )));
    }
    check_finite(predictions)?;
    let sw = stationary_weights(t, cfg)?;
    match cfg.method {
        ConsensusMethod::PowerIteration => Ok(ConsensusResult {
            prediction: weighted(&sw.weights, predictions),
            weights: sw.weights,
            rounds_run: sw.rounds,
            converged: sw.converged,
            trace: None,
        }),
        ConsensusMethod::Pooling => {
            let mut trace = vec![BeliefVector::initial(predictions)?];
            while trace.len() <= cfg.max_rounds {
                let prev = trace.last().expect("trace is never empty");
                let next = pool_step(prev, t)?;
                let settled = next
                    .beliefs
                    .iter()
                    .zip(&prev.beliefs)
                    .all(|(a, b)| (a - b).abs() <= cfg.tolerance);
                trace.push(next);
                if settled {
                    break;
                }
            }
            let last = trace.last().expect("trace is never empty");
            let k = last.beliefs.len() as f64;
            let (lo, hi) = min_max(predictions);
            let prediction = (last.beliefs.iter().sum::<f64>() / k).clamp(lo, hi);
            let converged = last
                .beliefs
                .iter()
                .all(|b| (b - prediction).abs() <= cfg.tolerance);
            Ok(ConsensusResult {
                prediction,
                weights: sw.weights,
                rounds_run: last.round,
                converged,
                trace: Some(trace),
            })
        }
    }
}

/// Beliefs after 0, 1, ..., `rounds` pooling steps.
pub fn pooling_trace(predictions: &[f64], t: &TrustMatrix, rounds: usize) -> Result<Vec<BeliefVector>> {
    if predictions.len() != t.len() {
        return Err(Error::invalid("prediction count does not match trust matrix"));
    }
    let mut trace = Vec::with_capacity(rounds + 1);
    trace.push(BeliefVector::initial(predictions)?);
    for _ in 0..rounds {
        let next = pool_step(trace.last().expect("non-empty"), t)?;
        trace.push(next);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> TrustMatrix {
        TrustMatrix::from_rows(&[vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn pool_step_example() {
        let t = TrustMatrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        let b = pool_step(&BeliefVector::initial(&[1.0, 0.0]).unwrap(), &t).unwrap();
        assert_eq!(b.beliefs, vec![0.5, 0.25]);
        assert_eq!(b.round, 1);
        let bad = BeliefVector::initial(&[1.0]).unwrap();
        assert!(pool_step(&bad, &t).is_err());
    }

    #[test]
    fn pool_step_unanimous_and_self_trust() {
        let t = TrustMatrix::from_rows(&[vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3], vec![0.1, 0.1, 0.8]])
            .unwrap();
        let b = pool_step(&BeliefVector::initial(&[2.5; 3]).unwrap(), &t).unwrap();
        for v in b.beliefs {
            assert!((v - 2.5).abs() < 1e-15);
        }
        let eps = 1e-300;
        let near_identity =
            TrustMatrix::from_rows(&[vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]).unwrap();
        let b = pool_step(&BeliefVector::initial(&[3.0, -1.0]).unwrap(), &near_identity).unwrap();
        assert_eq!(b.beliefs, vec![3.0, -1.0]);
    }

    #[test]
    fn stationary_examples() {
        let u = stationary_weights(&TrustMatrix::uniform(4).unwrap(), &ConsensusConfig::default())
            .unwrap();
        assert!(u.converged);
        for w in &u.weights {
            assert!((w - 0.25).abs() < 1e-15);
        }
        // w0 * 0.1 = w1 * 0.5 and w0 + w1 = 1 -> (5/6, 1/6)
        let s = stationary_weights(&two_state(), &ConsensusConfig::default()).unwrap();
        assert!(s.converged);
        assert!((s.weights[0] - 5.0 / 6.0).abs() < 1e-10);
        assert!((s.weights[1] - 1.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let t = TrustMatrix::from_rows(&[vec![0.999, 0.001], vec![0.002, 0.998]]).unwrap();
        let cfg = ConsensusConfig {
            max_rounds: 3,
            ..ConsensusConfig::default()
        };
        let s = stationary_weights(&t, &cfg).unwrap();
        assert!(!s.converged);
        assert_eq!(s.rounds, 3);
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn consensus_examples() {
        let cfg = ConsensusConfig::default();
        let t3 = TrustMatrix::from_rows(&[vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3], vec![0.1, 0.1, 0.8]])
            .unwrap();
        assert_eq!(consensus_predict(&[3.7; 3], &t3, &cfg).unwrap().prediction, 3.7);
        let r = consensus_predict(&[0.0, 1.0], &two_state(), &cfg).unwrap();
        assert!((r.prediction - 1.0 / 6.0).abs() < 1e-10);
        let r = consensus_predict(&[0.0, 1.0, 2.0], &TrustMatrix::uniform(3).unwrap(), &cfg).unwrap();
        assert!((r.prediction - 1.0).abs() < 1e-15);
        assert!(consensus_predict(&[0.0], &two_state(), &cfg).is_err());
        assert!(consensus_predict(&[0.0, f64::NAN], &two_state(), &cfg).is_err());
    }

    #[test]
    fn pooling_matches_power_iteration() {
        let cfg = ConsensusConfig {
            max_rounds: 500,
            tolerance: 1e-14,
            method: ConsensusMethod::Pooling,
        };
        let t = TrustMatrix::from_rows(&[vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3], vec![0.1, 0.1, 0.8]])
            .unwrap();
        let p = [1.0, -2.0, 4.0];
        let pooled = consensus_predict(&p, &t, &cfg).unwrap();
        let power = consensus_predict(
            &p,
            &t,
            &ConsensusConfig {
                method: ConsensusMethod::PowerIteration,
                ..cfg
            },
        )
        .unwrap();
        assert!(pooled.converged);
        assert!((pooled.prediction - power.prediction).abs() < 1e-8);
        assert_eq!(pooled.weights, power.weights);
        let trace = pooled.trace.unwrap();
        assert_eq!(trace.last().unwrap().round, pooled.rounds_run);
    }

    #[test]
    fn trace_lengths() {
        let t = two_state();
        let tr = pooling_trace(&[0.0, 1.0], &t, 0).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr[0].beliefs, vec![0.0, 1.0]);
        let tr = pooling_trace(&[0.0, 1.0], &t, 1).unwrap();
        assert_eq!(tr[1], pool_step(&tr[0], &t).unwrap());
    }
}
