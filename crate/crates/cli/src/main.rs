use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use efclass::learners::ModelFamily;
use efclass::synth::{generate_cohort, inject_missing, write_cohort, CohortConfig, SchemaChoice};
use efclass::Error;
use efclass_cli::pipeline::{exit_code_for, prepare, select_features, ArtifactSet};
use efclass_cli::{
    emit_figures, run_pipeline, verify_reference_tables, write_artifacts, ConfigOverrides, PipelineConfig,
    RfeConfig, RunReport, Stage,
};

#[derive(Parser)]
#[command(name = "efclass", version, about = "Ejection-fraction band classification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaArg {
    Step1,
    Step2,
}

impl From<SchemaArg> for SchemaChoice {
    fn from(s: SchemaArg) -> Self {
        match s {
            SchemaArg::Step1 => SchemaChoice::Step1,
            SchemaArg::Step2 => SchemaChoice::Step2,
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    /// Pipeline configuration (TOML).
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Built-in schema name or schema file.
    #[arg(long)]
    schema: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of cross-validation folds.
    #[arg(short, long)]
    k: Option<usize>,
    /// Comma-separated model families, e.g. random_forest,knn.
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Comma-separated decreasing RFE subset sizes.
    #[arg(long, value_delimiter = ',')]
    rfe_sizes: Option<Vec<usize>>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<PipelineConfig, Error> {
        let models = self
            .models
            .as_ref()
            .map(|m| m.iter().map(|s| s.trim().parse::<ModelFamily>()).collect::<Result<Vec<_>, _>>())
            .transpose()?;
        let o = ConfigOverrides {
            dataset: self.dataset.clone(),
            schema: self.schema.clone(),
            seed: self.seed,
            k: self.k,
            models,
            rfe_sizes: self.rfe_sizes.clone(),
            output_dir: self.out.clone(),
        };
        PipelineConfig::resolve(self.config.as_deref(), &o)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic cohort CSV and its generative truth.
    Generate {
        /// Cohort configuration (TOML); otherwise the default planted cohort.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "step1")]
        schema: SchemaArg,
        #[arg(short, long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of feature cells to blank after generation.
        #[arg(long, default_value_t = 0.0)]
        missing_rate: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the full pipeline and write the report and plot data.
    Run(RunArgs),
    /// Run only feature elimination and write its curve.
    Rfe(RunArgs),
    /// Recompute the published metric tables from their confusion matrices.
    VerifyPaper {
        /// Print the result as JSON instead of a text diff.
        #[arg(long)]
        json: bool,
    },
    /// Write plot CSVs from an existing report.
    EmitFigures {
        #[arg(short, long)]
        report: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn fail(stage: Stage, e: &Error) -> ExitCode {
    eprintln!("error: {} stage failed: {e}", stage.name());
    ExitCode::from(exit_code_for(e, stage) as u8)
}

fn generate(
    config: Option<&Path>,
    schema: SchemaChoice,
    n: usize,
    seed: u64,
    missing_rate: f64,
    out: &Path,
) -> Result<(), (Stage, Error)> {
    let cfg = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| (Stage::Config, e.into()))?;
            toml::from_str::<CohortConfig>(&text).map_err(|e| (Stage::Config, Error::Config(e.to_string())))?
        }
        None => CohortConfig::default_planted(schema, n, seed),
    };
    let (d, truth) = generate_cohort(&cfg).map_err(|e| (Stage::Config, e))?;
    let d = if missing_rate > 0.0 {
        inject_missing(&d, missing_rate, cfg.seed).map_err(|e| (Stage::Config, e))?
    } else {
        d
    };
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| (Stage::Write, e.into()))?;
    }
    let tp = write_cohort(&d, &truth, out).map_err(|e| (Stage::Write, e))?;
    println!("wrote {} ({} rows, class counts {:?})", out.display(), d.n_rows(), truth.class_counts);
    println!("wrote {}", tp.display());
    Ok(())
}

fn rfe_only(args: &RunArgs) -> Result<(), (Stage, Error)> {
    let cfg = args.resolve().map_err(|e| (Stage::Config, e))?;
    let prepared = prepare(&cfg).map_err(|e| (e.stage, e.source))?;
    let rfe = cfg
        .rfe
        .clone()
        .unwrap_or_else(|| RfeConfig::full_grid(prepared.balanced.n_features()));
    let result = select_features(&prepared.balanced, &rfe, cfg.seed).map_err(|e| (e.stage, e.source))?;

    let write = || -> Result<(), Error> {
        std::fs::create_dir_all(&cfg.output_dir)?;
        let mut set = ArtifactSet::new();
        let mut curve = Vec::new();
        result.write_curve_csv(&mut curve)?;
        set.write(&cfg.output_dir.join("rmse_curve.csv"), &curve)?;
        set.write(&cfg.output_dir.join("rfe.json"), serde_json::to_string_pretty(&result)?.as_bytes())?;
        set.commit();
        Ok(())
    };
    write().map_err(|e| (Stage::Write, e))?;
    for (size, r) in result.curve() {
        println!("{size:>3}  {r:.4}");
    }
    println!("selected ({}): {}", result.selected_size, result.selected.join(", "));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };

    match cli.command {
        Command::Generate {
            config,
            schema,
            n,
            seed,
            missing_rate,
            out,
        } => match generate(config.as_deref(), schema.into(), n, seed, missing_rate, &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err((stage, e)) => fail(stage, &e),
        },
        Command::Run(args) => {
            let cfg = match args.resolve() {
                Ok(c) => c,
                Err(e) => return fail(Stage::Config, &e),
            };
            let report = match run_pipeline(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(e.stage, &e.source),
            };
            match write_artifacts(&report, &cfg.output_dir) {
                Ok(files) => {
                    print!("{}", report.render_text());
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(Stage::Write, &e),
            }
        }
        Command::Rfe(args) => match rfe_only(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err((stage, e)) => fail(stage, &e),
        },
        Command::VerifyPaper { json } => {
            let r = verify_reference_tables();
            if json {
                println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
            } else {
                print!("{}", r.render_text());
            }
            if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Command::EmitFigures { report, out } => {
            let text = match std::fs::read_to_string(&report) {
                Ok(t) => t,
                Err(e) => return fail(Stage::Load, &e.into()),
            };
            let parsed = match RunReport::from_json(&text) {
                Ok(r) => r,
                Err(e) => return fail(Stage::Load, &e),
            };
            match emit_figures(&parsed, &out) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(Stage::Write, &e),
            }
        }
    }
}
