//! Greedy CART regression tree.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::ensemble::{check_dim, PredictiveModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A binary regression tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    nodes: Vec<Node>,
    dim: usize,
    max_depth: usize,
}

impl TreeModel {
    /// A tree with a single leaf.
    pub fn constant(value: f64, dim: usize) -> Self {
        TreeModel {
            nodes: vec![Node::Leaf { value }],
            dim,
            max_depth: 1,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Length of the longest root-to-leaf path (0 for a single leaf).
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Arena index of the leaf that `x` falls into.
    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        check_dim(self.dim, x.len())?;
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return Ok(i),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

impl PredictiveModel for TreeModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, x: &[f64]) -> Result<f64> {
        match self.nodes[self.leaf_index(x)?] {
            Node::Leaf { value } => Ok(value),
            Node::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    sse: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

struct Builder<'a> {
    data: &'a Dataset,
    max_depth: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn label(&self, i: usize) -> f64 {
        self.data.labels()[i]
    }

    fn feature(&self, i: usize, j: usize) -> f64 {
        self.data.features()[[i, j]]
    }

    fn build(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let n = idx.len() as f64;
        let mean = idx.iter().map(|&i| self.label(i)).sum::<f64>() / n;
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: mean });

        let pure = idx.iter().all(|&i| self.label(i) == self.label(idx[0]));
        if depth >= self.max_depth || idx.len() < 2 || pure {
            return id;
        }
        let parent_sse: f64 = idx.iter().map(|&i| (self.label(i) - mean).powi(2)).sum();
        let Some(best) = self.best_split(&idx, mean) else {
            return id;
        };
        if !(best.sse < parent_sse) {
            return id;
        }
        let left = self.build(best.left, depth + 1);
        let right = self.build(best.right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    /// Exhaustive search over features (ascending) and midpoints between
    /// distinct adjacent sorted values (ascending). Only strict improvements
    /// replace the incumbent, so ties resolve to the lowest feature and then the
    /// lowest threshold.
    fn best_split(&self, idx: &[usize], mean: f64) -> Option<Candidate> {
        let m = idx.len();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut order = idx.to_vec();
        for j in 0..self.data.dim() {
            order.sort_by(|&a, &b| {
                self.feature(a, j)
                    .total_cmp(&self.feature(b, j))
                    .then(a.cmp(&b))
            });
            // Labels shifted by the node mean to limit cancellation.
            let total: f64 = order.iter().map(|&i| self.label(i) - mean).sum();
            let total_sq: f64 = order.iter().map(|&i| (self.label(i) - mean).powi(2)).sum();
            let mut s = 0.0;
            let mut sq = 0.0;
            for k in 0..m - 1 {
                let y = self.label(order[k]) - mean;
                s += y;
                sq += y * y;
                let lo = self.feature(order[k], j);
                let hi = self.feature(order[k + 1], j);
                if lo == hi {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = (m - k - 1) as f64;
                let sse = (sq - s * s / nl) + ((total_sq - sq) - (total - s).powi(2) / nr);
                if best.is_none_or(|(_, _, b)| sse < b) {
                    let mut t = 0.5 * (lo + hi);
                    if !(t < hi) {
                        t = lo;
                    }
                    best = Some((j, t, sse));
                }
            }
        }
        let (feature, threshold, sse) = best?;
        let (left, right) = idx
            .iter()
            .partition(|&&i| self.feature(i, feature) <= threshold);
        Some(Candidate {
            feature,
            threshold,
            sse,
            left,
            right,
        })
    }
}

/// Fits a regression tree by greedy variance-reduction splitting.
///
/// Growth stops at `max_depth`, at pure or singleton nodes, and when no split
/// reduces the within-node squared error. Leaves predict their mean label.
pub fn fit_tree(data: &Dataset, max_depth: usize) -> Result<TreeModel> {
    if max_depth == 0 {
        return Err(Error::invalid("max_depth must be at least 1"));
    }
    let mut b = Builder {
        data,
        max_depth,
        nodes: Vec::new(),
    };
    b.build((0..data.len()).collect(), 0);
    Ok(TreeModel {
        nodes: b.nodes,
        dim: data.dim(),
        max_depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn step_data() -> Dataset {
        Dataset::from_rows(
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            &[0.0, 0.0, 1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn depth_one_step() {
        let t = fit_tree(&step_data(), 1).unwrap();
        match t.nodes()[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert!(threshold > 1.0 && threshold < 2.0);
                assert_eq!(threshold, 1.5);
            }
            _ => panic!("expected a split at the root"),
        }
        assert_eq!(t.predict(&[0.5]).unwrap(), 0.0);
        assert_eq!(t.predict(&[2.5]).unwrap(), 1.0);
    }

    #[test]
    fn constant_labels_give_single_leaf() {
        let d = Dataset::from_rows(&[vec![0.0], vec![5.0], vec![9.0]], &[0.7; 3]).unwrap();
        let t = fit_tree(&d, 4).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert!((t.predict(&[123.0]).unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(TreeModel::constant(0.7, 1).predict(&[-4.0]).unwrap(), 0.7);
    }

    #[test]
    fn constant_features_give_single_leaf() {
        let d = Dataset::from_rows(&[vec![1.0], vec![1.0]], &[0.0, 1.0]).unwrap();
        let t = fit_tree(&d, 3).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict(&[1.0]).unwrap(), 0.5);
    }

    #[test]
    fn tie_prefers_lowest_feature() {
        // Both features separate the labels identically.
        let d = Dataset::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]],
            &[0.0, 0.0, 1.0, 1.0],
        )
        .unwrap();
        let t = fit_tree(&d, 1).unwrap();
        assert!(matches!(t.nodes()[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn leaves_hold_mean_labels_and_depth_is_bounded() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.37).sin(), (t * 0.11).cos()]
            })
            .collect();
        let labels: Vec<f64> = rows.iter().map(|r| r[0] * 3.0 - r[1] * r[1]).collect();
        let d = Dataset::from_rows(&rows, &labels).unwrap();
        for depth in 1..6 {
            let t = fit_tree(&d, depth).unwrap();
            assert!(t.depth() <= depth);
            let mut groups: HashMap<usize, Vec<f64>> = HashMap::new();
            for (r, y) in rows.iter().zip(&labels) {
                groups.entry(t.leaf_index(r).unwrap()).or_default().push(*y);
            }
            for (leaf, ys) in groups {
                let mean = ys.iter().sum::<f64>() / ys.len() as f64;
                match t.nodes()[leaf] {
                    Node::Leaf { value } => assert!((value - mean).abs() < 1e-9),
                    _ => unreachable!(),
                }
            }
        }
    }

    #[test]
    fn rejects_zero_depth_and_bad_dimension() {
        assert!(fit_tree(&step_data(), 0).is_err());
        let t = fit_tree(&step_data(), 1).unwrap();
        assert!(t.predict(&[1.0, 2.0]).is_err());
    }
}
