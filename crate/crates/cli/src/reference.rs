//! Published confusion matrices and metric tables, embedded as fixtures, and
//! a cell-by-cell checker that recomputes the metrics from the matrices.

use std::fmt::Write as _;

use efclass::eval::{per_class_metrics, ConfusionMatrix};
use serde::{Deserialize, Serialize};

pub const TOLERANCE_PP: f64 = 1.0;

pub const METRIC_NAMES: [&str; 4] = ["precision", "recall", "F-score", "G-score"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Rows are actual classes, as the matrix is printed.
    AsPrinted,
    /// The printed matrix has predicted classes on its rows; transpose first.
    Transposed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub name: String,
    /// Counts as printed.
    pub counts: [[usize; 3]; 3],
    pub orientation: Orientation,
    /// Published percentages per class: precision, recall, F, G.
    pub published: [[f64; 4]; 3],
}

impl ReferenceTable {
    fn new(name: &str, counts: [[usize; 3]; 3], orientation: Orientation, published: [[u32; 4]; 3]) -> Self {
        ReferenceTable {
            name: name.to_string(),
            counts,
            orientation,
            published: published.map(|r| r.map(f64::from)),
        }
    }

    pub fn matrix(&self) -> ConfusionMatrix {
        let m = ConfusionMatrix::from_counts(self.counts);
        match self.orientation {
            Orientation::AsPrinted => m,
            Orientation::Transposed => m.transpose(),
        }
    }

    pub fn with_orientation(&self, orientation: Orientation) -> Self {
        ReferenceTable {
            orientation,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReference {
    pub name: String,
    pub counts: [[usize; 3]; 3],
    /// Published matrix accuracy in percent.
    pub published: f64,
}

/// The five step-1 learners and the step-2 forest.
pub fn reference_tables() -> Vec<ReferenceTable> {
    use Orientation::*;
    vec![
        ReferenceTable::new(
            "step1/random_forest",
            [[28, 10, 4], [5, 26, 11], [8, 7, 27]],
            AsPrinted,
            [[68, 66, 67, 67], [60, 61, 61, 61], [64, 64, 64, 64]],
        ),
        ReferenceTable::new(
            "step1/svm",
            [[10, 29, 3], [3, 37, 2], [2, 20, 20]],
            AsPrinted,
            [[66, 23, 35, 39], [43, 88, 57, 61], [80, 47, 60, 62]],
        ),
        ReferenceTable::new(
            "step1/decision_tree",
            [[23, 8, 11], [8, 22, 12], [3, 11, 28]],
            AsPrinted,
            [[67, 54, 60, 61], [53, 52, 53, 53], [54, 66, 60, 60]],
        ),
        ReferenceTable::new(
            "step1/knn",
            [[20, 18, 4], [6, 34, 2], [5, 13, 24]],
            AsPrinted,
            [[64, 47, 54, 55], [52, 80, 63, 65], [80, 58, 66, 67]],
        ),
        // Row sums 34/41/51 against column sums 42/42/42: predicted classes
        // appear to be on the rows.
        ReferenceTable::new(
            "step1/ordinal_logit",
            [[23, 8, 3], [8, 22, 11], [11, 12, 28]],
            Transposed,
            [[54, 67, 60, 61], [52, 53, 53, 53], [66, 54, 60, 60]],
        ),
        ReferenceTable::new(
            "step2/random_forest",
            [[33, 5, 4], [10, 18, 14], [8, 13, 21]],
            AsPrinted,
            [[64, 78, 70, 71], [50, 42, 46, 46], [53, 50, 51, 51]],
        ),
    ]
}

/// The best step-1 matrix against the reported highest efficiency.
pub fn accuracy_references() -> Vec<AccuracyReference> {
    vec![AccuracyReference {
        name: "step1/random_forest".into(),
        counts: [[28, 10, 4], [5, 26, 11], [8, 7, 27]],
        published: 65.0,
    }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    pub class: usize,
    pub metric: String,
    /// Percent; `None` when the metric is undefined for the matrix.
    pub computed: Option<f64>,
    pub published: f64,
    pub pass: bool,
}

impl CellCheck {
    pub fn deviation(&self) -> Option<f64> {
        self.computed.map(|c| c - self.published)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub name: String,
    pub orientation: Orientation,
    /// Informational checks are reported but do not decide the outcome.
    pub graded: bool,
    pub cells: Vec<CellCheck>,
}

impl TableCheck {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CellCheck> {
        self.cells.iter().filter(|c| !c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCheck {
    pub name: String,
    pub computed: f64,
    pub published: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tolerance_pp: f64,
    pub tables: Vec<TableCheck>,
    pub accuracy: Vec<AccuracyCheck>,
    pub passed: bool,
}

pub fn check_table(t: &ReferenceTable, graded: bool, tolerance_pp: f64) -> TableCheck {
    let metrics = per_class_metrics(&t.matrix()).ok();
    let mut cells = Vec::with_capacity(12);
    for class in 0..3 {
        let m = metrics.as_ref().map(|m| m.per_class[class]);
        let values = [
            m.and_then(|m| m.precision),
            m.and_then(|m| m.recall),
            m.and_then(|m| m.f_score),
            m.and_then(|m| m.g_score),
        ];
        for (k, v) in values.into_iter().enumerate() {
            let computed = v.map(|x| 100.0 * x);
            let published = t.published[class][k];
            cells.push(CellCheck {
                class,
                metric: METRIC_NAMES[k].to_string(),
                computed,
                published,
                pass: computed.is_some_and(|c| (c - published).abs() <= tolerance_pp + 1e-9),
            });
        }
    }
    TableCheck {
        name: t.name.clone(),
        orientation: t.orientation,
        graded,
        cells,
    }
}

pub fn check_accuracy(a: &AccuracyReference, tolerance_pp: f64) -> AccuracyCheck {
    let computed = ConfusionMatrix::from_counts(a.counts).accuracy().map_or(f64::NAN, |x| 100.0 * x);
    AccuracyCheck {
        name: a.name.clone(),
        computed,
        published: a.published,
        pass: (computed - a.published).abs() <= tolerance_pp + 1e-9,
    }
}

/// Grades `tables` and `accuracy`; `informational` tables are checked and
/// shown without affecting the outcome.
pub fn verify_tables(
    tables: &[ReferenceTable],
    informational: &[ReferenceTable],
    accuracy: &[AccuracyReference],
    tolerance_pp: f64,
) -> VerificationReport {
    let mut checks: Vec<TableCheck> = tables.iter().map(|t| check_table(t, true, tolerance_pp)).collect();
    checks.extend(informational.iter().map(|t| check_table(t, false, tolerance_pp)));
    let accuracy: Vec<AccuracyCheck> = accuracy.iter().map(|a| check_accuracy(a, tolerance_pp)).collect();
    let passed = checks.iter().filter(|t| t.graded).all(TableCheck::passed) && accuracy.iter().all(|a| a.pass);
    VerificationReport {
        tolerance_pp,
        tables: checks,
        accuracy,
        passed,
    }
}

/// Checks every embedded table. Transposed tables are graded after
/// transposition; their as-printed reading is reported for information.
pub fn verify_reference_tables() -> VerificationReport {
    let tables = reference_tables();
    let informational: Vec<ReferenceTable> = tables
        .iter()
        .filter(|t| t.orientation == Orientation::Transposed)
        .map(|t| t.with_orientation(Orientation::AsPrinted))
        .collect();
    verify_tables(&tables, &informational, &accuracy_references(), TOLERANCE_PP)
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "undef".to_string(), |x| format!("{x:.2}"))
}

impl VerificationReport {
    /// Cell-by-cell diff, one line per cell.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for t in &self.tables {
            let kind = if t.graded { "graded" } else { "informational" };
            let orient = match t.orientation {
                Orientation::AsPrinted => "as printed",
                Orientation::Transposed => "transposed",
            };
            let verdict = if t.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{} ({orient}, {kind}): {verdict}", t.name);
            for c in &t.cells {
                let _ = writeln!(
                    s,
                    "  class {} {:<9} computed {:>6}  published {:>3}  diff {:>6}  {}",
                    c.class,
                    c.metric,
                    fmt_pct(c.computed),
                    c.published,
                    c.deviation().map_or_else(|| "-".to_string(), |d| format!("{d:+.2}")),
                    if c.pass { "ok" } else { "MISMATCH" }
                );
            }
        }
        for a in &self.accuracy {
            let _ = writeln!(
                s,
                "{} matrix accuracy: computed {:.2}  published {}  {}",
                a.name,
                a.computed,
                a.published,
                if a.pass { "ok" } else { "MISMATCH" }
            );
        }
        let graded: Vec<&TableCheck> = self.tables.iter().filter(|t| t.graded).collect();
        let bad_cells: usize = graded.iter().map(|t| t.failures().count()).sum();
        let total_cells: usize = graded.iter().map(|t| t.cells.len()).sum();
        let _ = writeln!(
            s,
            "overall: {} ({} of {} graded cells within {} pp)",
            if self.passed { "PASS" } else { "FAIL" },
            total_cells - bad_cells,
            total_cells,
            self.tolerance_pp
        );
        s
    }
}
