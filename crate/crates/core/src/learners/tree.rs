//! CART classification tree with Gini impurity splits.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tabular::{Dataset, OrdinalLabel, N_CLASSES};

/// Gini impurity `1 - sum(p_c^2)` of a class-count vector.
pub fn gini_impurity(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::Domain("gini impurity of an empty node".into()));
    }
    let n = total as f64;
    Ok(1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

/// `n * gini` for a node of `n` samples, i.e. `n - sum(c^2) / n`.
fn weighted_gini(counts: &[usize; N_CLASSES], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    n as f64 - sq / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub min_leaf: usize,
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 5,
            max_depth: Some(8),
        }
    }
}

/// Tree node stored in an arena; children are indices into the node list.
/// Rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class: OrdinalLabel,
        counts: [usize; N_CLASSES],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
    n_features: usize,
    /// Count-weighted Gini decrease attributed to each feature.
    impurity_decrease: Vec<f64>,
}

impl DecisionTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, i: usize) -> usize {
            match t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }

    pub fn feature_importance(&self) -> &[f64] {
        &self.impurity_decrease
    }

    /// Sum over splits of `n * G(parent) - n_l * G(left) - n_r * G(right)`.
    pub fn total_impurity_decrease(&self) -> f64 {
        self.impurity_decrease.iter().sum()
    }

    /// Index of the leaf `row` is routed to.
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { .. } => return i,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<OrdinalLabel> {
        if row.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                got: row.len(),
            });
        }
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> OrdinalLabel {
        match self.nodes[self.leaf_index(row)] {
            TreeNode::Leaf { class, .. } => class,
            TreeNode::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }
}

/// Grows a tree on the whole dataset, considering every feature at each split.
pub fn train_tree(d: &Dataset, min_leaf: usize, max_depth: usize) -> Result<DecisionTree> {
    let params = TreeParams {
        min_leaf,
        max_depth: Some(max_depth),
    };
    let sample: Vec<usize> = (0..d.n_rows()).collect();
    grow(d, &sample, &params, None)
}

pub fn train_tree_with(d: &Dataset, params: &TreeParams) -> Result<DecisionTree> {
    let sample: Vec<usize> = (0..d.n_rows()).collect();
    grow(d, &sample, params, None)
}

/// Per-split feature subsampling for forests.
pub(crate) struct FeatureSampler<'a> {
    pub mtry: usize,
    pub rng: &'a mut StreamRng,
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [OrdinalLabel],
    params: &'a TreeParams,
    sampler: Option<FeatureSampler<'a>>,
    nodes: Vec<TreeNode>,
    decrease: Vec<f64>,
    n_features: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
    left_len: usize,
}

/// Grows a tree over `sample` (row indices into `d`, repeats allowed).
pub(crate) fn grow(
    d: &Dataset,
    sample: &[usize],
    params: &TreeParams,
    sampler: Option<FeatureSampler<'_>>,
) -> Result<DecisionTree> {
    if sample.is_empty() {
        return Err(Error::Training("cannot grow a tree on an empty sample".into()));
    }
    if params.min_leaf == 0 {
        return Err(Error::Parameter("min_leaf must be at least 1".into()));
    }
    let mut b = Builder {
        rows: d.rows(),
        labels: d.labels(),
        params,
        sampler,
        nodes: Vec::new(),
        decrease: vec![0.0; d.n_features()],
        n_features: d.n_features(),
    };
    let mut idx = sample.to_vec();
    b.build(&mut idx, 0);
    Ok(DecisionTree {
        nodes: b.nodes,
        n_features: d.n_features(),
        impurity_decrease: b.decrease,
    })
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; N_CLASSES] {
        let mut c = [0; N_CLASSES];
        for &i in idx {
            c[self.labels[i].index()] += 1;
        }
        c
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let counts = self.counts(idx);
        let me = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class: OrdinalLabel::argmax(&counts),
            counts,
        });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || idx.len() < 2 * self.params.min_leaf {
            return me;
        }
        let Some(split) = self.best_split(idx) else {
            return me;
        };

        let parent = weighted_gini(&counts, idx.len());
        self.decrease[split.feature] += (parent - split.score).max(0.0);

        let f = split.feature;
        let rows = self.rows;
        idx.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
        let (lo, hi) = idx.split_at_mut(split.left_len);
        let left = self.build(lo, depth + 1);
        let right = self.build(hi, depth + 1);
        self.nodes[me] = TreeNode::Split {
            feature: f,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }

    fn candidate_order(&mut self) -> (Vec<usize>, usize) {
        let mut features: Vec<usize> = (0..self.n_features).collect();
        match self.sampler.as_mut() {
            Some(s) => {
                features.shuffle(s.rng);
                let m = s.mtry;
                (features, m)
            }
            None => {
                let m = features.len();
                (features, m)
            }
        }
    }

    fn best_split(&mut self, idx: &[usize]) -> Option<BestSplit> {
        let (features, mtry) = self.candidate_order();
        let min_leaf = self.params.min_leaf;
        let n = idx.len();
        let total = self.counts(idx);
        let mut best: Option<BestSplit> = None;
        let mut visited = 0;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);

        // Features with no admissible threshold do not count towards mtry.
        for f in features {
            if visited >= mtry {
                break;
            }
            column.clear();
            column.extend(idx.iter().map(|&i| (self.rows[i][f], self.labels[i].index())));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut left = [0usize; N_CLASSES];
            let mut found = false;
            for pos in 0..n - 1 {
                left[column[pos].1] += 1;
                let left_len = pos + 1;
                let (v, next) = (column[pos].0, column[pos + 1].0);
                if v >= next || left_len < min_leaf || n - left_len < min_leaf {
                    continue;
                }
                found = true;
                let mut right = total;
                for c in 0..N_CLASSES {
                    right[c] -= left[c];
                }
                let score = weighted_gini(&left, left_len) + weighted_gini(&right, n - left_len);
                if best.as_ref().is_none_or(|b| score < b.score) {
                    let mut threshold = 0.5 * (v + next);
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                        left_len,
                    });
                }
            }
            if found {
                visited += 1;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[usize]) -> Vec<OrdinalLabel> {
        v.iter().map(|&c| OrdinalLabel::new(c).unwrap()).collect()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini_impurity(&[42, 0, 0]).unwrap(), 0.0);
        assert!((gini_impurity(&[1, 1, 1]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((gini_impurity(&[2, 1, 1]).unwrap() - 0.625).abs() < 1e-15);
        assert!(matches!(gini_impurity(&[0, 0, 0]), Err(Error::Domain(_))));
    }

    #[test]
    fn pure_root_is_leaf() {
        let d = Dataset::from_features(vec![vec![1.0], vec![2.0], vec![3.0]], labels(&[1, 1, 1])).unwrap();
        let t = train_tree(&d, 1, 10).unwrap();
        assert_eq!(t.node_count(), 1);
        assert!(matches!(t.root(), TreeNode::Leaf { class, .. } if class.index() == 1));
    }

    #[test]
    fn one_dimensional_split_between_gap() {
        let d = Dataset::from_features(
            vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]],
            labels(&[0, 0, 2, 2]),
        )
        .unwrap();
        let t = train_tree(&d, 1, 10).unwrap();
        assert_eq!(t.node_count(), 3);
        match t.root() {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert!(*threshold > 1.0 && *threshold < 10.0);
                assert_eq!(*threshold, 5.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
    }

    #[test]
    fn depth_zero_is_majority_stump() {
        let d = Dataset::from_features(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            labels(&[2, 1, 1, 2, 0]),
        )
        .unwrap();
        let t = train_tree(&d, 1, 0).unwrap();
        assert_eq!(t.node_count(), 1);
        // counts (1, 2, 2): tie between classes 1 and 2 goes to 1
        assert!(matches!(t.root(), TreeNode::Leaf { class, counts } if class.index() == 1 && *counts == [1, 2, 2]));
    }

    #[test]
    fn min_leaf_blocks_small_children() {
        let d = Dataset::from_features(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            labels(&[0, 2, 2, 2]),
        )
        .unwrap();
        let t = train_tree(&d, 2, 10).unwrap();
        // The only pure split would isolate one row; with min_leaf 2 the split is 2|2.
        match t.root() {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 1.5),
            other => panic!("expected split, got {other:?}"),
        }
        assert!(t.nodes().iter().all(|n| match n {
            TreeNode::Leaf { counts, .. } => counts.iter().sum::<usize>() >= 2,
            _ => true,
        }));
    }

    #[test]
    fn constant_feature_never_split() {
        let d = Dataset::from_features(
            vec![vec![5.0, 0.0], vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0]],
            labels(&[0, 0, 1, 1]),
        )
        .unwrap();
        let t = train_tree(&d, 1, 10).unwrap();
        assert_eq!(t.feature_importance()[0], 0.0);
        assert!(t.feature_importance()[1] > 0.0);
    }

    #[test]
    fn importance_sums_to_total_decrease() {
        let d = Dataset::from_features(
            vec![vec![0.0, 3.0], vec![1.0, 2.0], vec![2.0, 2.0], vec![3.0, 0.0], vec![4.0, 1.0]],
            labels(&[0, 1, 0, 2, 2]),
        )
        .unwrap();
        let t = train_tree(&d, 1, 10).unwrap();
        // Root: n*G = 5 - (4+1+4)/5 = 3.2; a fully grown tree ends pure.
        assert!((t.total_impurity_decrease() - 3.2).abs() < 1e-12);
    }

    #[test]
    fn width_mismatch_is_shape_error() {
        let d = Dataset::from_features(vec![vec![0.0], vec![1.0]], labels(&[0, 1])).unwrap();
        let t = train_tree(&d, 1, 3).unwrap();
        assert!(matches!(t.predict(&[0.0, 1.0]), Err(Error::Shape { .. })));
    }

    #[test]
    fn empty_dataset_fails() {
        let d = Dataset::from_features(vec![], vec![]).unwrap();
        assert!(matches!(train_tree(&d, 1, 3), Err(Error::Training(_))));
    }
}
