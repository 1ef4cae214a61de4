//! Confusion matrices, per-class metrics, cross-validation and model ranking.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::ModelSpec;
use crate::rng;
use crate::tabular::{standardize, Dataset, FoldPlan, OrdinalLabel, N_CLASSES};

/// 3x3 counts; rows are the actual class, columns the predicted class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: [[usize; N_CLASSES]; N_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[usize; N_CLASSES]; N_CLASSES]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn counts(&self) -> &[[usize; N_CLASSES]; N_CLASSES] {
        &self.counts
    }

    pub fn get(&self, actual: usize, predicted: usize) -> usize {
        self.counts[actual][predicted]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..N_CLASSES).map(|c| self.counts[c][c]).sum()
    }

    /// Per-class supports.
    pub fn row_sums(&self) -> [usize; N_CLASSES] {
        self.counts.map(|r| r.iter().sum())
    }

    pub fn col_sums(&self) -> [usize; N_CLASSES] {
        let mut s = [0; N_CLASSES];
        for row in &self.counts {
            for (acc, v) in s.iter_mut().zip(row) {
                *acc += v;
            }
        }
        s
    }

    /// Trace over total; `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.trace() as f64 / total as f64)
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0; N_CLASSES]; N_CLASSES];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                t[j][i] = v;
            }
        }
        ConfusionMatrix { counts: t }
    }

    /// Relabels class `c` as `perm[c]` on both axes.
    pub fn relabel(&self, perm: [usize; N_CLASSES]) -> Self {
        let mut out = [[0; N_CLASSES]; N_CLASSES];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                out[perm[i]][perm[j]] = v;
            }
        }
        ConfusionMatrix { counts: out }
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().flatten().zip(other.counts.iter().flatten()) {
            *a += b;
        }
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14}{:>8}{:>8}{:>8}", "actual\\pred", "0", "1", "2");
        for (c, row) in self.counts.iter().enumerate() {
            let name = OrdinalLabel::new(c).expect("class").display_name();
            let _ = writeln!(s, "{:<14}{:>8}{:>8}{:>8}", name, row[0], row[1], row[2]);
        }
        s
    }
}

pub fn confusion_matrix(actual: &[OrdinalLabel], predicted: &[OrdinalLabel]) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::Shape {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::Domain("no predictions to tabulate".into()));
    }
    let mut counts = [[0; N_CLASSES]; N_CLASSES];
    for (a, p) in actual.iter().zip(predicted) {
        counts[a.index()][p.index()] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Metrics for one class. `None` marks a value left undefined by an empty
/// row or column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    /// Harmonic mean of precision and recall.
    pub f_score: Option<f64>,
    /// Geometric mean of precision and recall.
    pub g_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub per_class: [ClassMetrics; N_CLASSES],
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
    pub macro_f_score: Option<f64>,
    pub macro_g_score: Option<f64>,
    /// Trace over total of the matrix the table was computed from.
    pub accuracy: f64,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

pub fn per_class_metrics(cm: &ConfusionMatrix) -> Result<MetricsTable> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Domain("all-zero confusion matrix".into()));
    }
    let rows = cm.row_sums();
    let cols = cm.col_sums();
    let per_class = std::array::from_fn(|c| {
        let hit = cm.counts[c][c] as f64;
        let precision = (cols[c] > 0).then(|| hit / cols[c] as f64);
        let recall = (rows[c] > 0).then(|| hit / rows[c] as f64);
        let (f_score, g_score) = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => (Some(2.0 * p * r / (p + r)), Some((p * r).sqrt())),
            (Some(_), Some(_)) => (Some(0.0), Some(0.0)),
            _ => (None, None),
        };
        ClassMetrics {
            precision,
            recall,
            f_score,
            g_score,
        }
    });
    let per_class: [ClassMetrics; N_CLASSES] = per_class;
    Ok(MetricsTable {
        macro_precision: mean_defined(per_class.iter().map(|m| m.precision)),
        macro_recall: mean_defined(per_class.iter().map(|m| m.recall)),
        macro_f_score: mean_defined(per_class.iter().map(|m| m.f_score)),
        macro_g_score: mean_defined(per_class.iter().map(|m| m.g_score)),
        per_class,
        accuracy: cm.trace() as f64 / total as f64,
    })
}

/// Whole percent, rounding halves up.
pub fn display_percent(x: f64) -> i64 {
    (x * 100.0 + 0.5).floor() as i64
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{}%", display_percent(x)))
}

impl MetricsTable {
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14}{:>10}{:>10}{:>10}{:>10}",
            "class", "precision", "recall", "F-score", "G-score"
        );
        for (c, m) in self.per_class.iter().enumerate() {
            let name = OrdinalLabel::new(c).expect("class").display_name();
            let _ = writeln!(
                s,
                "{:<14}{:>10}{:>10}{:>10}{:>10}",
                name,
                cell(m.precision),
                cell(m.recall),
                cell(m.f_score),
                cell(m.g_score)
            );
        }
        let _ = writeln!(
            s,
            "{:<14}{:>10}{:>10}{:>10}{:>10}",
            "macro",
            cell(self.macro_precision),
            cell(self.macro_recall),
            cell(self.macro_f_score),
            cell(self.macro_g_score)
        );
        let _ = writeln!(s, "{:<14}{:>10}", "matrix acc.", cell(Some(self.accuracy)));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub model: String,
    pub seed: u64,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Out-of-fold predictions pooled over all folds.
    pub pooled: ConfusionMatrix,
    pub predictions: Vec<OrdinalLabel>,
}

struct FoldOutcome {
    test: Vec<usize>,
    predicted: Vec<OrdinalLabel>,
    accuracy: f64,
}

fn evaluate_fold(d: &Dataset, spec: &ModelSpec, plan: &FoldPlan, fold: usize, seed: u64) -> Result<FoldOutcome> {
    let test_idx = plan.test_indices(fold);
    let mut train = d.select_rows(&plan.train_indices(fold));
    let mut test = d.select_rows(&test_idx);
    if spec.family().needs_scaling() {
        let (scaled, params) = standardize(&train)?;
        test = params.apply_dataset(&test)?;
        train = scaled;
    }
    let model = spec.fit(&train, rng::substream_seed(seed, "model", fold as u64))?;
    let predicted = model.predict_all(&test)?;
    let correct = predicted.iter().zip(test.labels()).filter(|(p, a)| p == a).count();
    Ok(FoldOutcome {
        accuracy: correct as f64 / test_idx.len() as f64,
        test: test_idx,
        predicted,
    })
}

/// k-fold cross-validation of one model specification under `plan`.
///
/// Folds are evaluated in parallel and merged in fold order. Learners that
/// need it are standardized on each training split.
pub fn cross_validate(d: &Dataset, spec: &ModelSpec, plan: &FoldPlan, seed: u64) -> Result<CvResult> {
    if plan.n_rows() != d.n_rows() {
        return Err(Error::Shape {
            expected: d.n_rows(),
            got: plan.n_rows(),
        });
    }
    let outcomes: Vec<Result<FoldOutcome>> = (0..plan.k())
        .into_par_iter()
        .map(|f| evaluate_fold(d, spec, plan, f, seed))
        .collect();

    let mut predictions = vec![OrdinalLabel::NORMAL; d.n_rows()];
    let mut fold_accuracies = Vec::with_capacity(plan.k());
    for (fold, outcome) in outcomes.into_iter().enumerate() {
        let o = outcome.map_err(|e| Error::CrossValidation {
            fold,
            source: Box::new(e),
        })?;
        for (&i, &p) in o.test.iter().zip(&o.predicted) {
            predictions[i] = p;
        }
        fold_accuracies.push(o.accuracy);
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(CvResult {
        model: spec.name().to_string(),
        seed,
        pooled: confusion_matrix(d.labels(), &predictions)?,
        fold_accuracies,
        mean_accuracy,
        predictions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub rank: usize,
    pub model: String,
    pub mean_accuracy: f64,
    pub macro_f_score: Option<f64>,
}

/// Orders models by mean CV accuracy, then macro F of the pooled matrix,
/// then name.
pub fn rank_models(results: &[CvResult]) -> Result<Vec<RankedModel>> {
    if results.is_empty() {
        return Err(Error::Parameter("no models to rank".into()));
    }
    let mut seen = HashSet::new();
    for r in results {
        if !seen.insert(r.model.as_str()) {
            return Err(Error::Parameter(format!("duplicate model identifier `{}`", r.model)));
        }
    }
    let mut rows: Vec<RankedModel> = results
        .iter()
        .map(|r| {
            Ok(RankedModel {
                rank: 0,
                model: r.model.clone(),
                mean_accuracy: r.mean_accuracy,
                macro_f_score: per_class_metrics(&r.pooled)?.macro_f_score,
            })
        })
        .collect::<Result<_>>()?;
    let by_f = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    rows.sort_by(|a, b| {
        b.mean_accuracy
            .total_cmp(&a.mean_accuracy)
            .then_with(|| by_f(a.macro_f_score, b.macro_f_score))
            .then_with(|| a.model.cmp(&b.model))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(rows)
}
