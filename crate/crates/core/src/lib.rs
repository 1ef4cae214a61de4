//! Ordinal classification of ejection-fraction bands from clinical tabular
//! data: preparation, five learners, forest-driven feature elimination,
//! evaluation and a synthetic cohort generator.

// Negated comparisons are deliberate: NaN has to fail these guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod eval;
pub mod feature_select;
pub mod io;
pub mod learners;
pub mod rng;
pub mod synth;
pub mod tabular;

pub use error::{Error, Result};
pub use tabular::{Dataset, FeatureSchema, FoldPlan, OrdinalLabel};
