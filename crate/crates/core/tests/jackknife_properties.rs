mod common;

use common::{permute_matrix, trust_and_predictions};
use degroot::jackknife::delete_one_matrix;
use degroot::{consensus_predict, jackknife_se, ConsensusConfig};
use proptest::prelude::*;

fn cfg() -> ConsensusConfig {
    ConsensusConfig {
        max_rounds: 100_000,
        tolerance: 1e-14,
        ..ConsensusConfig::default()
    }
}

proptest! {
    #[test]
    fn shift_and_scale((t, p) in trust_and_predictions(3, 8), a in -4.0f64..4.0, b in -20.0f64..20.0) {
        let base = jackknife_se(&p, &t, &cfg()).unwrap().standard_error;
        let moved: Vec<f64> = p.iter().map(|v| a * v + b).collect();
        let se = jackknife_se(&moved, &t, &cfg()).unwrap().standard_error;
        prop_assert!((se - a.abs() * base).abs() <= 1e-8 * (1.0 + se));
    }

    #[test]
    fn delete_one_stays_within_survivors((t, p) in trust_and_predictions(3, 8)) {
        let r = jackknife_se(&p, &t, &cfg()).unwrap();
        for (i, &d) in r.delete_one_predictions.iter().enumerate() {
            let rest = p.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v);
            let lo = rest.clone().fold(f64::INFINITY, f64::min);
            let hi = rest.fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(d >= lo && d <= hi);
        }
    }

    #[test]
    fn coinciding_delete_one_predictions_give_zero((t, _) in trust_and_predictions(3, 8), c in -10.0f64..10.0) {
        let p = vec![c; t.len()];
        prop_assert_eq!(jackknife_se(&p, &t, &cfg()).unwrap().standard_error, 0.0);
    }

    #[test]
    fn agent_permutation_is_equivariant(
        ((t, p), perm) in trust_and_predictions(3, 8).prop_flat_map(|(t, p)| {
            let k = t.len();
            (Just((t, p)), common::permutation(k))
        }),
    ) {
        let r = jackknife_se(&p, &t, &cfg()).unwrap();
        let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        let rp = jackknife_se(&pp, &permute_matrix(&t, &perm), &cfg()).unwrap();
        for (a, &i) in perm.iter().enumerate() {
            prop_assert!((rp.delete_one_predictions[a] - r.delete_one_predictions[i]).abs() <= 1e-9);
        }
        prop_assert!((rp.standard_error - r.standard_error).abs() <= 1e-9);
    }

    #[test]
    fn delete_one_matches_direct_consensus((t, p) in trust_and_predictions(3, 8)) {
        let r = jackknife_se(&p, &t, &cfg()).unwrap();
        for i in 0..t.len() {
            let rest: Vec<f64> = p.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
            let direct = consensus_predict(&rest, &delete_one_matrix(&t, i).unwrap(), &cfg()).unwrap();
            prop_assert_eq!(direct.prediction, r.delete_one_predictions[i]);
        }
    }
}
