//! Delete-one-agent jackknife standard error of the consensus prediction.
//!
//! Only the trust matrix and the agents' existing predictions are used; no
//! model is queried again.

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::consensus::{consensus_predict, ConsensusConfig, ConsensusMethod};
use crate::error::{Error, Result};
use crate::trust::TrustMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JackknifeResult {
    pub delete_one_predictions: Vec<f64>,
    pub mean_delete_one: f64,
    pub standard_error: f64,
}

/// Trust matrix of the ensemble without agent `i`: row and column `i` are
/// dropped and every remaining row is rescaled to sum to one.
pub fn delete_one_matrix(t: &TrustMatrix, i: usize) -> Result<TrustMatrix> {
    let k = t.len();
    if k < 3 {
        return Err(Error::invalid(format!(
            "delete-one needs at least 3 agents, got {k}"
        )));
    }
    if i >= k {
        return Err(Error::invalid(format!("agent index {i} out of range for {k} agents")));
    }
    let keep: Vec<usize> = (0..k).filter(|&j| j != i).collect();
    let sub: Array2<f64> = t.tau().select(Axis(0), &keep).select(Axis(1), &keep);
    TrustMatrix::normalized(sub)
}

/// `sqrt((K-1)/K * sum_i (p_{-i} - mean)^2)` over the delete-one consensus
/// predictions. Each delete-one consensus uses power iteration with `cfg`'s
/// round limit and tolerance.
pub fn jackknife_se(predictions: &[f64], t: &TrustMatrix, cfg: &ConsensusConfig) -> Result<JackknifeResult> {
    let k = t.len();
    if predictions.len() != k {
        return Err(Error::invalid(format!(
            "{} predictions for a {k}-agent trust matrix",
            predictions.len()
        )));
    }
    if k < 3 {
        return Err(Error::invalid(format!("jackknife needs at least 3 agents, got {k}")));
    }
    let cfg = ConsensusConfig {
        method: ConsensusMethod::PowerIteration,
        ..*cfg
    };
    let delete_one = (0..k)
        .map(|i| {
            let sub = delete_one_matrix(t, i)?;
            let rest: Vec<f64> = predictions
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &p)| p)
                .collect();
            Ok(consensus_predict(&rest, &sub, &cfg)?.prediction)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(delete_one))
}

fn summarize(delete_one: Vec<f64>) -> JackknifeResult {
    let k = delete_one.len() as f64;
    // Centered on the first value so coinciding predictions give exactly zero.
    let first = delete_one[0];
    let mean = first + delete_one.iter().map(|p| p - first).sum::<f64>() / k;
    let ss: f64 = delete_one.iter().map(|p| (p - mean) * (p - mean)).sum();
    JackknifeResult {
        delete_one_predictions: delete_one,
        mean_delete_one: mean,
        standard_error: ((k - 1.0) / k * ss).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> TrustMatrix {
        TrustMatrix::from_rows(&[
            vec![0.5, 0.25, 0.25],
            vec![0.2, 0.4, 0.4],
            vec![0.1, 0.3, 0.6],
        ])
        .unwrap()
    }

    #[test]
    fn delete_one_examples() {
        let u = delete_one_matrix(&TrustMatrix::uniform(3).unwrap(), 1).unwrap();
        for v in u.tau() {
            assert!((v - 0.5).abs() < 1e-15);
        }
        // drop agent index 0: rows [0.4, 0.4] and [0.3, 0.6] renormalized
        let d = delete_one_matrix(&t3(), 0).unwrap();
        let expected = [[0.5, 0.5], [1.0 / 3.0, 2.0 / 3.0]];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!((d.tau()[[i, j]] - v).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn delete_one_keeps_already_normalized_rows() {
        // Rows 1 and 2 give agent 0 vanishing trust, so they already sum to 1
        // on the surviving columns.
        let tiny = 1e-300;
        let t = TrustMatrix::from_rows(&[
            vec![0.2, 0.3, 0.5],
            vec![tiny, 0.25, 0.75],
            vec![tiny, 0.6, 0.4],
        ])
        .unwrap();
        let d = delete_one_matrix(&t, 0).unwrap();
        assert_eq!(d.tau()[[0, 0]], 0.25);
        assert_eq!(d.tau()[[0, 1]], 0.75);
        assert_eq!(d.tau()[[1, 0]], 0.6);
        assert_eq!(d.tau()[[1, 1]], 0.4);
    }

    #[test]
    fn rejects_small_ensembles() {
        let t2 = TrustMatrix::uniform(2).unwrap();
        assert!(delete_one_matrix(&t2, 0).is_err());
        assert!(jackknife_se(&[0.0, 1.0], &t2, &ConsensusConfig::default()).is_err());
        assert!(delete_one_matrix(&t3(), 3).is_err());
    }

    #[test]
    fn uniform_hand_example() {
        let r = jackknife_se(&[0.0, 0.0, 3.0], &TrustMatrix::uniform(3).unwrap(), &ConsensusConfig::default())
            .unwrap();
        let expected = [1.5, 1.5, 0.0];
        for (a, b) in r.delete_one_predictions.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((r.mean_delete_one - 1.0).abs() < 1e-12);
        assert!((r.standard_error - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_agents_have_zero_error() {
        let r = jackknife_se(&[2.0; 4], &TrustMatrix::uniform(4).unwrap(), &ConsensusConfig::default())
            .unwrap();
        assert_eq!(r.standard_error, 0.0);
    }

    #[test]
    fn two_agent_formula_documented() {
        // With K = 2 each delete-one consensus is the surviving prediction, so
        // SE = sqrt(1/2 * 2 * (d/2)^2) = |p0 - p1| / 2.
        let r = summarize(vec![1.0, 4.0]);
        assert!((r.standard_error - 1.5).abs() < 1e-15);
    }
}
