//! Command-line orchestration: configuration, the end-to-end pipeline, run
//! reports, plot data and the reference-table checker.

pub mod config;
pub mod figures;
pub mod pipeline;
pub mod reference;
pub mod report;

pub use config::{ConfigOverrides, PipelineConfig, RfeConfig};
pub use figures::emit_figures;
pub use pipeline::{run_pipeline, write_artifacts, PipelineError, Stage};
pub use reference::{verify_reference_tables, VerificationReport};
pub use report::RunReport;
