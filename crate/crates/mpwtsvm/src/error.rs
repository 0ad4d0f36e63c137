//! Error type shared across the crate.

use std::path::PathBuf;

/// Errors produced by data loading, graph construction, optimization, and
/// model serialization.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Filesystem access failed for the named path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Refusing to overwrite an existing output without explicit permission.
    #[error("output {path} already exists (pass --force to overwrite)")]
    OutputExists { path: PathBuf },

    /// A CSV cell could not be parsed as a decimal number.
    #[error("{path}:{row}:{col}: cell {cell:?} is not a number")]
    NonNumericCell {
        path: PathBuf,
        /// 1-based row index.
        row: usize,
        /// 1-based column index.
        col: usize,
        cell: String,
    },

    /// A label token was not one of `+1`, `1`, `-1`.
    #[error("{path}:{row}: invalid label {label:?} (expected +1, 1, or -1)")]
    InvalidLabel {
        path: PathBuf,
        row: usize,
        label: String,
    },

    /// The two view files and the label file disagree on the number of rows.
    #[error("row count mismatch: {path_a} has {rows_a} rows but {path_b} has {rows_b}")]
    RowCountMismatch {
        path_a: PathBuf,
        rows_a: usize,
        path_b: PathBuf,
        rows_b: usize,
    },

    /// A CSV row had a different number of columns than the first row.
    #[error("{path}:{row}: expected {expected} columns, found {found}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },

    /// Matrix or vector dimensions are inconsistent with the operation.
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    /// A hyperparameter or configuration value is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A class has too few members for the requested operation.
    #[error("class {label:+} has {size} samples but {context} requires at least {required}")]
    ClassTooSmall {
        label: i8,
        size: usize,
        required: usize,
        context: &'static str,
    },

    /// A matrix stayed singular even after the regularization fallback.
    #[error("matrix is singular even after regularization (eps = {eps:e})")]
    SingularMatrix { eps: f64 },

    /// Every inter-class indicator entry was zero: nothing to optimize over.
    #[error("no support-vector candidates after pruning; increase the neighbor count k")]
    NoSupportVectorCandidates,

    /// The constraint system admits no feasible point.
    #[error("quadratic program is infeasible: {0}")]
    InfeasibleProgram(String),

    /// A model file failed to parse.
    #[error("corrupt model file {path}: {detail}")]
    ModelFormat { path: PathBuf, detail: String },

    /// A model file declares a schema version this build does not understand.
    #[error("model file {path} has schema version {found}, supported: {supported}")]
    SchemaVersion {
        path: PathBuf,
        found: u32,
        supported: u32,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line interface.
    ///
    /// Code 2 is reserved for argument-parsing errors (the parser exits with
    /// it directly), so library errors start at 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonNumericCell { .. }
            | Error::InvalidLabel { .. }
            | Error::RowCountMismatch { .. }
            | Error::RaggedRow { .. } => 3,
            Error::SingularMatrix { .. }
            | Error::NoSupportVectorCandidates
            | Error::InfeasibleProgram(_) => 4,
            Error::Io { .. } | Error::OutputExists { .. } => 5,
            Error::ModelFormat { .. } | Error::SchemaVersion { .. } => 6,
            Error::DimensionMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::ClassTooSmall { .. } => 1,
        }
    }
}
