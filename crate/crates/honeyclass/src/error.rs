//! Crate-wide error type.

use std::io;
use std::path::PathBuf;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A column named in the mapping is absent from the file header.
    #[error("column {column:?} is mapped but missing from the header")]
    UnmappedColumn { column: String },

    /// An element cell is neither numeric nor the missing token.
    #[error("malformed cell at row {row}, column {column:?}: {value:?}")]
    MalformedCell {
        row: usize,
        column: String,
        value: String,
    },

    /// A row violates the sample metadata invariants.
    #[error("invalid sample at row {row}: {reason}")]
    InvalidSample { row: usize, reason: String },

    /// A parse or filter produced a dataset with no rows.
    #[error("dataset contains no rows")]
    EmptyDataset,

    /// A retained sample lacks the label required by the task.
    #[error("sample {id:?} has no {what} label")]
    MissingLabel { id: String, what: String },

    /// Fewer than two distinct labels in a task table.
    #[error("task requires at least 2 distinct classes")]
    SingleClass,

    /// A class is too small for the requested estimator.
    #[error("class {class:?} has {count} sample(s), need at least {needed}")]
    InsufficientClassSamples {
        class: String,
        count: usize,
        needed: usize,
    },

    /// Not enough rows for the requested statistic.
    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { needed: usize, got: usize },

    /// Matrix is not positive definite even after ridge regularization.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// Scaler fitting was given an empty row subset.
    #[error("row subset is empty")]
    EmptyRowSet,

    /// A table still carries missing values where dense features are required.
    #[error("table has {count} missing value(s); impute before this step")]
    MissingValues { count: usize },

    /// Not enough samples for the requested fold count.
    #[error("cannot split {n} samples into {k} folds")]
    TooFewSamples { n: usize, k: usize },

    /// Truth/prediction vectors differ in length.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A label that is not in the class list.
    #[error("unknown label {label:?}")]
    UnknownLabel { label: String },

    /// Metrics requested on a confusion matrix with zero total count.
    #[error("confusion matrix is empty")]
    EmptyMatrix,

    /// Feature vector length differs from the model's training dimension.
    #[error("dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A hyperparameter failed validation.
    #[error("invalid hyperparameter: {reason}")]
    InvalidHyperparameter { reason: String },

    /// A classifier failed while training on one cross-validation fold.
    #[error("fold {fold}: {source}")]
    InFold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    /// Bad experiment or mapping configuration.
    #[error("configuration error: {reason}")]
    Config { reason: String },

    /// An output path could not be written.
    #[error("cannot write {path:?}: {source}")]
    UnwritablePath {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps a fold-local failure with its fold index.
    pub fn in_fold(fold: usize, source: Error) -> Self {
        Error::InFold {
            fold,
            source: Box::new(source),
        }
    }
}
