use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: column `{column}`: {message}")]
    Schema { column: String, message: String },

    #[error("parse error at row {row}, column `{column}`: cannot read `{value}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("label error at row {row}: `{value}` is not one of 0, 1, 2")]
    Label { row: usize, value: String },

    #[error("imputation error: column `{column}` has no observed values")]
    Imputation { column: String },

    #[error("balance error: {0}")]
    Balance(String),

    #[error("scaling error: column `{column}` has zero variance")]
    Scaling { column: String },

    #[error("fold error: {0}")]
    Fold(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("shape error: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("SMO did not converge after {iterations} iterations (max KKT violation {max_violation:.3e})")]
    Convergence {
        iterations: usize,
        max_violation: f64,
    },

    #[error("cross-validation failed on fold {fold}: {source}")]
    CrossValidation {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by a learner.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. }
                | Error::Parse { .. }
                | Error::Label { .. }
                | Error::Imputation { .. }
                | Error::Balance(_)
                | Error::Scaling { .. }
                | Error::Fold(_)
                | Error::Io(_)
                | Error::Csv(_)
        )
    }

    pub fn is_training_error(&self) -> bool {
        match self {
            Error::Training(_)
            | Error::Numeric(_)
            | Error::Invariant(_)
            | Error::Convergence { .. } => true,
            Error::CrossValidation { source, .. } => source.is_training_error(),
            _ => false,
        }
    }
}
