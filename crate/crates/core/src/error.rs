//! Error type shared by the pipeline stages.

use crate::case::CaseLabel;

/// Errors produced by parsing, generation, feature extraction, training and
/// evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A trace file row had the wrong column count or an unparsable number.
    #[error("line {line}: malformed row: {detail}")]
    MalformedRow { line: usize, detail: String },

    /// Timestamps in a trace file were not strictly increasing.
    #[error("line {line}: non-monotonic time")]
    NonMonotonicTime { line: usize },

    /// A series or trace had too few samples for the operation.
    #[error("too short: {0}")]
    TooShort(String),

    /// A feature was asked of an empty series.
    #[error("empty series")]
    EmptySeries,

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Motion-model parameter invariants were violated.
    #[error("invalid motion-model params: {0}")]
    InvalidParams(String),

    /// Two traces carried the same (case, sample_id).
    #[error("duplicate sample {case}_{sample_id}")]
    DuplicateSample { case: CaseLabel, sample_id: u32 },

    /// Standardization was asked to fit on an empty row subset.
    #[error("empty fit set")]
    EmptyFitSet,

    /// A file did not match the expected schema.
    #[error("schema mismatch{}: {detail}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    SchemaMismatch { detail: String, row: Option<usize> },

    /// Array dimensions did not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Training data contained only one class.
    #[error("training data contains a single class")]
    SingleClassTraining,

    /// Training diverged.
    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    /// A class had too few rows for the requested split.
    #[error("case {case}: {have} rows, need at least {need}")]
    InsufficientClassRows { case: CaseLabel, have: usize, need: usize },

    /// FitNet training was requested without a GA configuration.
    #[error("FitNet training requires a GA config")]
    MissingGaConfig,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
