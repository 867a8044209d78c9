mod common;

use common::{linear_ensemble, trust_and_predictions};
use degroot::baselines::{
    cv_adaptive_weights, cv_static_weights, mean_average, mse_average_weights, tau_average_weights,
};
use degroot::{build_trust_matrix, Dataset, QueryPoint, TrustConfig, WeightVector};
use proptest::prelude::*;

fn valid(w: &WeightVector) -> bool {
    w.weights().iter().all(|&v| v >= 0.0) && (w.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9
}

fn validation() -> impl Strategy<Value = Dataset> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..20).prop_map(|pts| {
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0]).collect();
        let labels: Vec<f64> = pts.iter().map(|p| p.1).collect();
        Dataset::from_rows(&rows, &labels).unwrap()
    })
}

proptest! {
    #[test]
    fn every_baseline_yields_a_weight_vector(ens in linear_ensemble(6), v in validation(), x in -5.0f64..5.0) {
        let q = QueryPoint::new(vec![x]).unwrap();
        let models = ens.models();
        prop_assert!(valid(&cv_static_weights(&models, &v, 1e-12).unwrap()));
        prop_assert!(valid(&cv_adaptive_weights(&models, &v, &q, 3, 1e-12).unwrap()));
        let (t, s) = build_trust_matrix(&ens, &q, &TrustConfig::default()).unwrap();
        prop_assert!(valid(&tau_average_weights(&t).unwrap()));
        prop_assert!(valid(&mse_average_weights(&s, 1e-12).unwrap()));
    }

    #[test]
    fn adaptive_over_whole_set_equals_static(ens in linear_ensemble(6), v in validation(), x in -5.0f64..5.0) {
        let models = ens.models();
        let q = QueryPoint::new(vec![x]).unwrap();
        let a = cv_adaptive_weights(&models, &v, &q, v.len(), 1e-12).unwrap();
        let s = cv_static_weights(&models, &v, 1e-12).unwrap();
        // Neighbor ordering changes the summation order, so compare up to rounding.
        for (x, y) in a.weights().iter().zip(s.weights()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn baselines_follow_agent_permutation(
        ((t, p), perm) in trust_and_predictions(2, 8).prop_flat_map(|(t, p)| {
            let k = t.len();
            (Just((t, p)), common::permutation(k))
        }),
    ) {
        let w = tau_average_weights(&t).unwrap();
        let wp = tau_average_weights(&common::permute_matrix(&t, &perm)).unwrap();
        for (a, &i) in perm.iter().enumerate() {
            prop_assert!((wp.weights()[a] - w.weights()[i]).abs() <= 1e-12);
        }
        let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        prop_assert!((mean_average(&pp).unwrap() - mean_average(&p).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn cv_static_follows_agent_permutation(ens in linear_ensemble(6), v in validation(), seed in any::<u64>()) {
        let models = ens.models();
        let k = models.len();
        let perm: Vec<usize> = (0..k).map(|i| (i + (seed as usize % k)) % k).collect();
        let permuted: Vec<_> = perm.iter().map(|&i| models[i]).collect();
        let w = cv_static_weights(&models, &v, 1e-12).unwrap();
        let wp = cv_static_weights(&permuted, &v, 1e-12).unwrap();
        for (a, &i) in perm.iter().enumerate() {
            prop_assert!((wp.weights()[a] - w.weights()[i]).abs() <= 1e-12);
        }
    }
}
