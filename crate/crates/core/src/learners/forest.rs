//! Random decision forest: bootstrap-aggregated CART trees with per-split
//! feature subsampling, out-of-bag error tracking and Gini importances.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, DecisionTree, FeatureSampler, TreeParams};
use crate::error::{Error, Result};
use crate::rng;
use crate::tabular::{Dataset, OrdinalLabel, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `floor(sqrt(p))`.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: None,
            min_leaf: 1,
            max_depth: None,
        }
    }
}

impl ForestParams {
    pub fn resolved_mtry(&self, n_features: usize) -> usize {
        self.mtry
            .unwrap_or_else(|| ((n_features as f64).sqrt().floor() as usize).max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    trees: Vec<DecisionTree>,
    n_trees: usize,
    mtry: usize,
    n_features: usize,
    /// OOB error using the first `t + 1` trees; `None` while no row has an
    /// out-of-bag vote yet.
    oob_error_curve: Vec<Option<f64>>,
    node_histogram: Vec<usize>,
    gini_importance: Vec<f64>,
}

impl ForestModel {
    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_trees(&self) -> usize {
        self.n_trees
    }

    pub fn mtry(&self) -> usize {
        self.mtry
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn oob_error_curve(&self) -> &[Option<f64>] {
        &self.oob_error_curve
    }

    /// OOB error of the whole forest.
    pub fn oob_error(&self) -> Option<f64> {
        self.oob_error_curve.last().copied().flatten()
    }

    pub fn node_histogram(&self) -> &[usize] {
        &self.node_histogram
    }

    /// Mean decrease in Gini impurity per feature, averaged over trees.
    pub fn gini_importance(&self) -> &[f64] {
        &self.gini_importance
    }

    pub fn votes(&self, row: &[f64]) -> Result<[usize; N_CLASSES]> {
        if row.len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let mut votes = [0; N_CLASSES];
        for t in &self.trees {
            votes[t.predict_unchecked(row).index()] += 1;
        }
        Ok(votes)
    }

    /// Majority vote over trees, ties to the lowest class index.
    pub fn predict(&self, row: &[f64]) -> Result<OrdinalLabel> {
        Ok(OrdinalLabel::argmax(&self.votes(row)?))
    }
}

pub fn predict_forest(m: &ForestModel, row: &[f64]) -> Result<OrdinalLabel> {
    m.predict(row)
}

/// Trains a forest. Tree `t` draws its bootstrap sample and split features
/// from its own substream of `seed`, so the result does not depend on how
/// trees are scheduled across threads.
pub fn train_forest(d: &Dataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    let n = d.n_rows();
    let p = d.n_features();
    if n == 0 {
        return Err(Error::Training("cannot train a forest on an empty dataset".into()));
    }
    if params.n_trees == 0 {
        return Err(Error::Parameter("n_trees must be at least 1".into()));
    }
    let mtry = params.resolved_mtry(p);
    if mtry == 0 || mtry > p {
        return Err(Error::Parameter(format!("mtry {mtry} outside 1..={p}")));
    }
    let tree_params = TreeParams {
        min_leaf: params.min_leaf,
        max_depth: params.max_depth,
    };

    let grown: Vec<(DecisionTree, Vec<bool>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::substream(seed, "forest", t as u64);
            let mut in_bag = vec![false; n];
            let sample: Vec<usize> = (0..n)
                .map(|_| {
                    let i = rng.random_range(0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();
            let sampler = FeatureSampler { mtry, rng: &mut rng };
            grow(d, &sample, &tree_params, Some(sampler)).map(|tree| (tree, in_bag))
        })
        .collect::<Result<_>>()?;

    let mut votes = vec![[0usize; N_CLASSES]; n];
    let mut oob_error_curve = Vec::with_capacity(grown.len());
    for (tree, in_bag) in &grown {
        for i in (0..n).filter(|&i| !in_bag[i]) {
            votes[i][tree.predict_unchecked(d.row(i)).index()] += 1;
        }
        let mut voted = 0usize;
        let mut wrong = 0usize;
        for (v, label) in votes.iter().zip(d.labels()) {
            if v.iter().sum::<usize>() > 0 {
                voted += 1;
                if OrdinalLabel::argmax(v) != *label {
                    wrong += 1;
                }
            }
        }
        oob_error_curve.push((voted > 0).then(|| wrong as f64 / voted as f64));
    }

    let trees: Vec<DecisionTree> = grown.into_iter().map(|(t, _)| t).collect();
    let mut gini_importance = vec![0.0; p];
    for t in &trees {
        for (acc, v) in gini_importance.iter_mut().zip(t.feature_importance()) {
            *acc += v;
        }
    }
    for v in &mut gini_importance {
        *v /= trees.len() as f64;
    }
    let node_histogram = trees.iter().map(DecisionTree::node_count).collect();

    Ok(ForestModel {
        n_trees: trees.len(),
        trees,
        mtry,
        n_features: p,
        oob_error_curve,
        node_histogram,
        gini_importance,
    })
}
