//! Plot data as headed CSV files. Rendering is left to external tools.

use std::path::{Path, PathBuf};

use efclass::{Error, Result};

use crate::pipeline::ArtifactSet;
use crate::report::RunReport;

fn csv_bytes<I, R>(header: [&str; 2], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Writes `oob_error.csv`, `node_histogram.csv`, `importance.csv` and, when
/// the report holds an RFE run, `rmse_curve.csv`. Tree numbering starts at 1.
pub fn emit_figures(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let forest = report
        .forest
        .as_ref()
        .ok_or_else(|| Error::Format("report has no forest diagnostics to plot".into()))?;
    std::fs::create_dir_all(dir)?;
    let mut set = ArtifactSet::new();

    let oob = csv_bytes(
        ["tree_count", "error"],
        forest.oob_error_curve.iter().enumerate().map(|(t, e)| {
            [(t + 1).to_string(), e.map(|v| v.to_string()).unwrap_or_default()]
        }),
    )?;
    set.write(&dir.join("oob_error.csv"), &oob)?;

    let hist = csv_bytes(
        ["tree_index", "node_count"],
        forest
            .node_histogram
            .iter()
            .enumerate()
            .map(|(t, n)| [(t + 1).to_string(), n.to_string()]),
    )?;
    set.write(&dir.join("node_histogram.csv"), &hist)?;

    let mut imp = Vec::new();
    forest.importance.write_csv(&mut imp)?;
    set.write(&dir.join("importance.csv"), &imp)?;

    if let Some(rfe) = &report.rfe {
        let mut curve = Vec::new();
        rfe.write_curve_csv(&mut curve)?;
        set.write(&dir.join("rmse_curve.csv"), &curve)?;
    }
    Ok(set.commit())
}
