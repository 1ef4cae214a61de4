//! The machine-readable run report and its plain-text summary.

use std::fmt::Write as _;

use efclass::eval::{display_percent, CvResult, MetricsTable, RankedModel};
use efclass::feature_select::{ImportanceRanking, RfeResult};
use efclass::learners::ModelSpec;
use efclass::{Error, Result};
use serde::{Deserialize, Serialize};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// SHA-256 of the resolved configuration.
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub schema: String,
    pub rows: usize,
    pub missing_cells: usize,
    pub class_counts: [usize; 3],
    /// Counts after upsampling.
    pub balanced_counts: [usize; 3],
    /// Features the models were evaluated on.
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub spec: ModelSpec,
    pub cv: CvResult,
    /// Computed from the pooled out-of-fold confusion matrix.
    pub metrics: MetricsTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestDiagnostics {
    pub n_trees: usize,
    /// Out-of-bag error after each tree; empty while no row is out of bag.
    pub oob_error_curve: Vec<Option<f64>>,
    pub node_histogram: Vec<usize>,
    pub importance: ImportanceRanking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub provenance: Provenance,
    pub data: DataSummary,
    /// In model name order.
    pub models: Vec<ModelReport>,
    pub ranking: Vec<RankedModel>,
    pub rfe: Option<RfeResult>,
    pub forest: Option<ForestDiagnostics>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(REPORT_FORMAT_VERSION) => {}
            Some(v) => return Err(Error::Format(format!("unsupported report format version {v}"))),
            None => return Err(Error::Format("report has no format_version".into())),
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn model(&self, name: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.cv.model == name)
    }

    /// Human-readable summary.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let d = &self.data;
        let _ = writeln!(s, "schema {}  rows {}  missing cells {}", d.schema, d.rows, d.missing_cells);
        let _ = writeln!(s, "class counts {:?} -> balanced {:?}", d.class_counts, d.balanced_counts);
        let _ = writeln!(s, "features ({}): {}", d.features.len(), d.features.join(", "));
        if let Some(rfe) = &self.rfe {
            let _ = writeln!(s, "\nRFE curve (size: cv rmse)");
            for (size, r) in rfe.curve() {
                let mark = if size == rfe.selected_size { "  <- selected" } else { "" };
                let _ = writeln!(s, "  {size:>3}: {r:.4}{mark}");
            }
        }
        for m in &self.models {
            let _ = writeln!(
                s,
                "\n== {} ==  cv mean accuracy {}%",
                m.cv.model,
                display_percent(m.cv.mean_accuracy)
            );
            s.push_str(&m.cv.pooled.render_text());
            s.push_str(&m.metrics.render_text());
        }
        let _ = writeln!(s, "\nranking");
        for r in &self.ranking {
            let _ = writeln!(s, "  {}. {:<15} {}%", r.rank, r.model, display_percent(r.mean_accuracy));
        }
        if let Some(f) = &self.forest {
            let _ = writeln!(s, "\nforest importance ({} trees)", f.n_trees);
            for e in &f.importance.entries {
                let _ = writeln!(s, "  {:<16} {:.4}", e.feature, e.importance);
            }
        }
        let p = &self.provenance;
        let _ = writeln!(s, "\nseed {}  config {}  version {}", p.seed, &p.config_hash[..12.min(p.config_hash.len())], p.version);
        s
    }
}
