use degroot::datagen::{
    generate_synthetic, lambda_schedule, logistic_label, partition, sample_mixture,
    HeterogeneityLambdaRule, PartitionKind, PartitionScheme, SyntheticConfig,
};
use degroot::Dataset;
use proptest::prelude::*;

fn rows_of(d: &Dataset) -> Vec<(Vec<u64>, u64)> {
    (0..d.len())
        .map(|i| {
            (
                d.row(i).iter().map(|v| v.to_bits()).collect(),
                d.labels()[i].to_bits(),
            )
        })
        .collect()
}

fn kind() -> impl Strategy<Value = PartitionKind> {
    prop_oneof![
        Just(PartitionKind::Random),
        Just(PartitionKind::SortedLabel),
        Just(PartitionKind::SortedFeature),
    ]
}

proptest! {
    #[test]
    fn partition_preserves_samples_and_balances_sizes(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0), 10..80),
        k in 2usize..8,
        kind in kind(),
        p in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let rows: Vec<Vec<f64>> = pts.iter().map(|t| vec![t.0, t.1]).collect();
        let labels: Vec<f64> = pts.iter().map(|t| t.2).collect();
        let d = Dataset::from_rows(&rows, &labels).unwrap();
        let scheme = PartitionScheme { kind, sort_fraction: p, feature_index: 1, seed };
        let parts = partition(&d, k, &scheme).unwrap();
        prop_assert_eq!(parts.len(), k);
        let sizes: Vec<usize> = parts.iter().map(Dataset::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all: Vec<_> = parts.iter().flat_map(rows_of).collect();
        let mut orig = rows_of(&d);
        all.sort();
        orig.sort();
        prop_assert_eq!(all, orig);
    }

    #[test]
    fn lambda_spread_grows_with_exponent(base in 1e-3f64..10.0, k in 3usize..10, q in 0.0f64..4.0, dq in 0.0f64..4.0) {
        let spread = |q: f64| {
            let l = lambda_schedule(&HeterogeneityLambdaRule { base_lambda: base, exponent: q, pivot: 3 }, k).unwrap();
            l.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - l.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        prop_assert!(spread(q + dq) >= spread(q) - 1e-12 * (1.0 + spread(q)));
    }

    #[test]
    fn synthetic_generation_is_reproducible(seed in any::<u64>()) {
        let cfg = SyntheticConfig { samples_per_agent: 20, test_samples: 10, seed, ..SyntheticConfig::default() };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        prop_assert_eq!(rows_of(&a.test), rows_of(&b.test));
        for (x, y) in a.agents.iter().zip(&b.agents) {
            prop_assert_eq!(rows_of(x), rows_of(y));
        }
    }

    #[test]
    fn noiseless_labels_are_in_unit_interval(seed in any::<u64>()) {
        let cfg = SyntheticConfig { seed, ..SyntheticConfig::default() };
        let d = sample_mixture(&cfg, 100, false, 7).unwrap();
        for i in 0..d.len() {
            let y = d.labels()[i];
            prop_assert!(y > 0.0 && y < 1.0);
            prop_assert_eq!(y, logistic_label(&cfg.alpha, d.row(i).as_slice().unwrap()));
        }
    }
}
