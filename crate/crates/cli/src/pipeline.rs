use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use efclass::eval::{cross_validate, per_class_metrics, rank_models};
use efclass::feature_select::{run_rfe, ImportanceRanking, RfeResult};
use efclass::io::write_atomic;
use efclass::learners::{train_forest, ModelSpec};
use efclass::rng::substream_seed;
use efclass::tabular::{impute_missing, load_dataset, stratified_folds, upsample_balance};
use efclass::{Dataset, Error, FeatureSchema, Result};
use rayon::prelude::*;

use crate::config::{PipelineConfig, RfeConfig};
use crate::figures::emit_figures;
use crate::report::{DataSummary, ForestDiagnostics, ModelReport, Provenance, RunReport, REPORT_FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Impute,
    Balance,
    Rfe,
    Folds,
    CrossValidation,
    Metrics,
    Ranking,
    Diagnostics,
    Write,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Impute => "impute",
            Stage::Balance => "balance",
            Stage::Rfe => "rfe",
            Stage::Folds => "folds",
            Stage::CrossValidation => "cross-validation",
            Stage::Metrics => "metrics",
            Stage::Ranking => "ranking",
            Stage::Diagnostics => "forest-diagnostics",
            Stage::Write => "write",
        }
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.name(), self.source)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl PipelineError {
    /// 1 usage/config, 2 data, 3 training.
    pub fn exit_code(&self) -> i32 {
        exit_code_for(&self.source, self.stage)
    }
}

pub fn exit_code_for(e: &Error, stage: Stage) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) => 1,
        Error::CrossValidation { source, .. } => exit_code_for(source, stage),
        e if e.is_data_error() => 2,
        e if e.is_training_error() => 3,
        Error::Json(_) | Error::Format(_) => 2,
        _ => match stage {
            Stage::Config => 1,
            Stage::Load | Stage::Impute | Stage::Balance | Stage::Folds | Stage::Write => 2,
            _ => 3,
        },
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

/// Loaded, imputed and balanced data ready for modelling.
pub struct Prepared {
    pub raw: Dataset,
    pub balanced: Dataset,
}

pub fn prepare(cfg: &PipelineConfig) -> std::result::Result<Prepared, PipelineError> {
    let schema = FeatureSchema::resolve(&cfg.schema).at(Stage::Config)?;
    let raw = load_dataset(&cfg.dataset, &schema).at(Stage::Load)?;
    let imputed = impute_missing(&raw).at(Stage::Impute)?;
    let balanced = upsample_balance(&imputed, substream_seed(cfg.seed, "balance", 0)).at(Stage::Balance)?;
    Ok(Prepared { raw, balanced })
}

pub fn select_features(d: &Dataset, rfe: &RfeConfig, seed: u64) -> std::result::Result<RfeResult, PipelineError> {
    run_rfe(d, &rfe.sizes, rfe.k, &rfe.forest, substream_seed(seed, "rfe", 0)).at(Stage::Rfe)
}

/// Impute, balance, optional RFE, per-model cross-validation, metrics,
/// ranking and forest diagnostics. Writes nothing.
pub fn run_pipeline(cfg: &PipelineConfig) -> std::result::Result<RunReport, PipelineError> {
    cfg.validate().at(Stage::Config)?;
    let Prepared { raw, balanced } = prepare(cfg)?;

    let rfe = match &cfg.rfe {
        Some(r) => Some((select_features(&balanced, r, cfg.seed)?, r.apply)),
        None => None,
    };
    let data = match &rfe {
        Some((r, true)) => balanced.select_features_by_name(&r.selected).at(Stage::Rfe)?,
        _ => balanced.clone(),
    };

    let plan = stratified_folds(&data, cfg.k, substream_seed(cfg.seed, "folds", 0)).at(Stage::Folds)?;
    let model_seed = substream_seed(cfg.seed, "forest", 0);
    let mut specs: Vec<ModelSpec> = cfg.models.clone();
    specs.sort_by_key(|m| m.name());
    let cv: Vec<_> = specs
        .par_iter()
        .map(|spec| cross_validate(&data, spec, &plan, model_seed))
        .collect::<Result<_>>()
        .at(Stage::CrossValidation)?;

    let models = specs
        .iter()
        .zip(cv)
        .map(|(spec, cv)| {
            Ok(ModelReport {
                spec: *spec,
                metrics: per_class_metrics(&cv.pooled)?,
                cv,
            })
        })
        .collect::<Result<Vec<_>>>()
        .at(Stage::Metrics)?;
    let results: Vec<_> = models.iter().map(|m| m.cv.clone()).collect();
    let ranking = rank_models(&results).at(Stage::Ranking)?;

    let forest = specs
        .iter()
        .find_map(|s| match s {
            ModelSpec::RandomForest(p) => Some(*p),
            _ => None,
        })
        .map(|params| -> Result<ForestDiagnostics> {
            let f = train_forest(&data, &params, substream_seed(cfg.seed, "forest", 1))?;
            Ok(ForestDiagnostics {
                n_trees: f.n_trees(),
                oob_error_curve: f.oob_error_curve().to_vec(),
                node_histogram: f.node_histogram().to_vec(),
                importance: ImportanceRanking::from_scores(&data.schema().feature_names(), f.gini_importance()),
            })
        })
        .transpose()
        .at(Stage::Diagnostics)?;

    Ok(RunReport {
        format_version: REPORT_FORMAT_VERSION,
        provenance: Provenance {
            seed: cfg.seed,
            config_hash: cfg.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        data: DataSummary {
            schema: raw.schema().name().to_string(),
            rows: raw.n_rows(),
            missing_cells: raw.count_missing(),
            class_counts: raw.class_counts(),
            balanced_counts: balanced.class_counts(),
            features: data.schema().feature_names(),
        },
        models,
        ranking,
        rfe: rfe.map(|(r, _)| r),
        forest,
    })
}

/// Files written so far; removed again unless the set is committed.
pub struct ArtifactSet {
    written: Vec<PathBuf>,
    committed: bool,
}

impl ArtifactSet {
    pub fn new() -> Self {
        ArtifactSet {
            written: Vec::new(),
            committed: false,
        }
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    pub fn track(&mut self, paths: impl IntoIterator<Item = PathBuf>) {
        self.written.extend(paths);
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Default for ArtifactSet {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for ArtifactSet {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

/// Writes `report.json`, `summary.txt` and the figure CSVs into `dir`. On
/// failure every file written by this call is removed.
pub fn write_artifacts(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut set = ArtifactSet::new();
    set.write(&dir.join("report.json"), report.to_json()?.as_bytes())?;
    set.write(&dir.join("summary.txt"), report.render_text().as_bytes())?;
    if report.forest.is_some() {
        let figures = emit_figures(report, dir)?;
        set.track(figures);
    }
    Ok(set.commit())
}
