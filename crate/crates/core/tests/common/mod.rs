#![allow(dead_code)]

use degroot::models::LinearModel;
use degroot::{Agent, Dataset, Ensemble, TrustMatrix};
use proptest::prelude::*;

/// Strictly positive row-stochastic matrix of size `k`.
pub fn trust_matrix(k: usize) -> impl Strategy<Value = TrustMatrix> {
    prop::collection::vec(0.01f64..1.0, k * k).prop_map(move |raw| {
        let rows: Vec<Vec<f64>> = raw
            .chunks(k)
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|v| v / s).collect()
            })
            .collect();
        TrustMatrix::from_rows(&rows).unwrap()
    })
}

pub fn sized_trust_matrix(max_k: usize) -> impl Strategy<Value = TrustMatrix> {
    (2..=max_k).prop_flat_map(trust_matrix)
}

/// Trust matrix paired with predictions of matching length.
pub fn trust_and_predictions(min_k: usize, max_k: usize) -> impl Strategy<Value = (TrustMatrix, Vec<f64>)> {
    (min_k..=max_k).prop_flat_map(|k| (trust_matrix(k), prop::collection::vec(-100.0f64..100.0, k)))
}

/// Small one-dimensional ensemble of linear models with distinct data.
pub fn linear_ensemble(max_k: usize) -> impl Strategy<Value = Ensemble<LinearModel>> {
    (2..=max_k).prop_flat_map(|k| {
        prop::collection::vec(
            (
                prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..12),
                -2.0f64..2.0,
                -2.0f64..2.0,
            ),
            k,
        )
        .prop_map(|agents| {
            let agents = agents
                .into_iter()
                .map(|(pts, w, b)| {
                    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0]).collect();
                    let labels: Vec<f64> = pts.iter().map(|p| p.1).collect();
                    Agent {
                        data: Dataset::from_rows(&rows, &labels).unwrap(),
                        model: LinearModel::new(vec![w], b).unwrap(),
                    }
                })
                .collect();
            Ensemble::new(agents).unwrap()
        })
    })
}

pub fn permute_matrix(t: &TrustMatrix, perm: &[usize]) -> TrustMatrix {
    let rows: Vec<Vec<f64>> = perm
        .iter()
        .map(|&i| perm.iter().map(|&j| t.tau()[[i, j]]).collect())
        .collect();
    TrustMatrix::from_rows(&rows).unwrap()
}

pub fn permutation(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..k).collect::<Vec<usize>>()).prop_shuffle()
}
