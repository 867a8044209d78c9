use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::stream_rng;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionKind {
    Random,
    SortedLabel,
    SortedFeature,
}

/// Splits data across agents with a tunable amount of heterogeneity.
///
/// A fraction `sort_fraction` of the samples is ordered by label (or by
/// `feature_index`) and cut into contiguous blocks, one per agent in order; the
/// rest is shuffled and dealt round-robin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionScheme {
    pub kind: PartitionKind,
    pub sort_fraction: f64,
    pub feature_index: usize,
    pub seed: u64,
}

impl Default for PartitionScheme {
    fn default() -> Self {
        PartitionScheme {
            kind: PartitionKind::Random,
            sort_fraction: 0.0,
            feature_index: 0,
            seed: 0,
        }
    }
}

impl PartitionScheme {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sort_fraction) {
            return Err(Error::Config(format!(
                "sort_fraction must lie in [0, 1], got {}",
                self.sort_fraction
            )));
        }
        Ok(())
    }
}

/// Partitions `data` into `k` datasets whose sizes differ by at most one.
///
/// The sample order is first shuffled. The leading `floor(p * n)` shuffled
/// samples form the sorted fraction (stable sort on the key, ties by shuffled
/// position); block `b` receives `q` or `q + 1` of them, larger blocks first.
/// The remaining samples are dealt round-robin starting at the first block that
/// did not get an extra sorted sample.
pub fn partition(data: &Dataset, k: usize, scheme: &PartitionScheme) -> Result<Vec<Dataset>> {
    scheme.validate()?;
    let n = data.len();
    if k == 0 || n < k {
        return Err(Error::invalid(format!(
            "cannot split {n} samples into {k} partitions"
        )));
    }
    if scheme.kind == PartitionKind::SortedFeature && scheme.feature_index >= data.dim() {
        return Err(Error::invalid(format!(
            "feature_index {} out of range for dimension {}",
            scheme.feature_index,
            data.dim()
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(scheme.seed, 0));

    let n_sorted = match scheme.kind {
        PartitionKind::Random => 0,
        _ => ((scheme.sort_fraction * n as f64).floor() as usize).min(n),
    };
    let (sorted_part, random_part) = order.split_at_mut(n_sorted);
    let key = |i: usize| match scheme.kind {
        PartitionKind::SortedFeature => data.features()[[i, scheme.feature_index]],
        _ => data.labels()[i],
    };
    sorted_part.sort_by(|&a, &b| key(a).total_cmp(&key(b)));

    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); k];
    let (q, r) = (n_sorted / k, n_sorted % k);
    let mut it = sorted_part.iter().copied();
    for (b, block) in blocks.iter_mut().enumerate() {
        let size = q + usize::from(b < r);
        block.extend(it.by_ref().take(size));
    }
    for (t, &i) in random_part.iter().enumerate() {
        blocks[(r + t) % k].push(i);
    }
    blocks.iter().map(|b| data.select(b)).collect()
}

/// Per-agent regularization `base * (1 + (k - pivot) / K)^exponent` for
/// agents `k = 1..=K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeterogeneityLambdaRule {
    pub base_lambda: f64,
    pub exponent: f64,
    #[serde(default = "default_pivot")]
    pub pivot: i64,
}

fn default_pivot() -> i64 {
    3
}

pub fn lambda_schedule(rule: &HeterogeneityLambdaRule, k: usize) -> Result<Vec<f64>> {
    if !(rule.base_lambda > 0.0) {
        return Err(Error::invalid("base_lambda must be > 0"));
    }
    if k == 0 {
        return Err(Error::invalid("agent count must be positive"));
    }
    (1..=k as i64)
        .map(|agent| {
            let base = 1.0 + (agent - rule.pivot) as f64 / k as f64;
            if base <= 0.0 {
                return Err(Error::invalid(format!(
                    "nonpositive base {base} for agent {agent}"
                )));
            }
            Ok(rule.base_lambda * base.powf(rule.exponent))
        })
        .collect()
}
