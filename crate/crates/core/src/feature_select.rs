//! Forest-driven recursive feature elimination scored by cross-validated RMSE.
//!
//! Labels are scored as their numeric class index, so confusing Normal with
//! Low costs more than confusing adjacent bands.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{train_forest, ForestParams};
use crate::rng;
use crate::tabular::{stratified_folds, Dataset};

pub fn rmse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::Shape {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::Domain("rmse of empty vectors".into()));
    }
    let sq: f64 = predicted.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sq / predicted.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    pub importance: f64,
}

/// Features by descending importance; equal scores in name order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub entries: Vec<FeatureScore>,
}

impl ImportanceRanking {
    pub fn from_scores(names: &[String], scores: &[f64]) -> Self {
        let mut entries: Vec<FeatureScore> = names
            .iter()
            .zip(scores)
            .map(|(n, &s)| FeatureScore {
                feature: n.clone(),
                importance: s,
            })
            .collect();
        entries.sort_by(|a, b| {
            b.importance
                .total_cmp(&a.importance)
                .then_with(|| a.feature.cmp(&b.feature))
        });
        ImportanceRanking { entries }
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.feature.as_str()).collect()
    }

    pub fn position(&self, feature: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.feature == feature)
    }

    pub fn top(&self, n: usize) -> Vec<String> {
        self.entries.iter().take(n).map(|e| e.feature.clone()).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "gini_importance"])?;
        for e in &self.entries {
            w.write_record([e.feature.clone(), e.importance.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Gini importances of one forest trained on every feature of `d`.
pub fn rank_features(d: &Dataset, params: &ForestParams, seed: u64) -> Result<ImportanceRanking> {
    let forest = train_forest(d, params, rng::substream_seed(seed, "rank", 0))?;
    Ok(ImportanceRanking::from_scores(&d.schema().feature_names(), forest.gini_importance()))
}

/// Pooled out-of-fold RMSE of forest predictions under a stratified k-fold
/// plan. The plan and per-fold forests depend only on `seed`, not on which
/// features are present.
pub fn cv_rmse(d: &Dataset, params: &ForestParams, k: usize, seed: u64) -> Result<f64> {
    let plan = stratified_folds(d, k, rng::substream_seed(seed, "rfe-folds", 0))?;
    let folds: Vec<Result<Vec<(usize, f64)>>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train = d.select_rows(&plan.train_indices(f));
            let forest = train_forest(&train, params, rng::substream_seed(seed, "rfe-forest", f as u64))?;
            plan.test_indices(f)
                .into_iter()
                .map(|i| Ok((i, forest.predict(d.row(i))?.as_f64())))
                .collect()
        })
        .collect();
    let mut predicted = vec![0.0; d.n_rows()];
    for fold in folds {
        for (i, p) in fold? {
            predicted[i] = p;
        }
    }
    let actual: Vec<f64> = d.labels().iter().map(|l| l.as_f64()).collect();
    rmse(&predicted, &actual)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeStep {
    pub size: usize,
    /// Features in this subset, in schema order.
    pub features: Vec<String>,
    pub cv_rmse: f64,
    /// Ranking of this subset, used to choose the next one.
    pub ranking: ImportanceRanking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfeResult {
    pub steps: Vec<RfeStep>,
    pub selected: Vec<String>,
    pub selected_size: usize,
}

impl RfeResult {
    pub fn curve(&self) -> Vec<(usize, f64)> {
        self.steps.iter().map(|s| (s.size, s.cv_rmse)).collect()
    }

    /// Two-column `size,rmse` text.
    pub fn write_curve_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["size", "rmse"])?;
        for (size, r) in self.curve() {
            w.write_record([size.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn validate_sizes(sizes: &[usize], p: usize) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::Parameter("RFE size grid is empty".into()));
    }
    if sizes.iter().any(|&s| s == 0 || s > p) {
        return Err(Error::Parameter(format!("RFE sizes must lie in 1..={p}, got {sizes:?}")));
    }
    if sizes.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Parameter(format!("RFE sizes must strictly decrease, got {sizes:?}")));
    }
    Ok(())
}

fn in_schema_order(d: &Dataset, keep: &[String]) -> Vec<String> {
    d.schema()
        .feature_names()
        .into_iter()
        .filter(|n| keep.contains(n))
        .collect()
}

/// Recursive feature elimination over the descending `sizes` grid.
///
/// At each size the current subset is ranked by forest importance and scored
/// by [`cv_rmse`]; the lowest-ranked features are then dropped to reach the
/// next size. If the grid starts below the full width, the first cut is made
/// from a ranking of all features. The selected subset is the curve minimum,
/// with ties going to the smaller subset.
pub fn run_rfe(d: &Dataset, sizes: &[usize], k: usize, params: &ForestParams, seed: u64) -> Result<RfeResult> {
    validate_sizes(sizes, d.n_features())?;
    let mut current = d.schema().feature_names();
    if sizes[0] < current.len() {
        let ranking = rank_features(d, params, seed)?;
        current = in_schema_order(d, &ranking.top(sizes[0]));
    }

    let mut steps = Vec::with_capacity(sizes.len());
    for (s, &size) in sizes.iter().enumerate() {
        let subset = d.select_features_by_name(&current)?;
        let ranking = rank_features(&subset, params, seed)?;
        let score = cv_rmse(&subset, params, k, seed)?;
        let next = sizes.get(s + 1).map(|&n| in_schema_order(d, &ranking.top(n)));
        steps.push(RfeStep {
            size,
            features: current.clone(),
            cv_rmse: score,
            ranking,
        });
        if let Some(next) = next {
            current = next;
        }
    }

    let best = steps
        .iter()
        .enumerate()
        .fold(0, |best, (i, s)| if s.cv_rmse <= steps[best].cv_rmse { i } else { best });
    Ok(RfeResult {
        selected: steps[best].features.clone(),
        selected_size: steps[best].size,
        steps,
    })
}
