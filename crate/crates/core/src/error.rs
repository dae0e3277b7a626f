use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed JSON: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: unknown class identifier {name:?}")]
    UnknownClass { line: usize, name: String },

    #[error("line {line}: unknown group identifier {name:?}")]
    UnknownGroup { line: usize, name: String },

    #[error("line {line}: empty annotation list")]
    EmptyAnnotations { line: usize },

    #[error("line {line}: duplicate instance id {id:?}")]
    DuplicateId { line: usize, id: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),

    #[error("invalid label matrix: {0}")]
    InvalidLabelMatrix(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty instance subset")]
    EmptySubset,

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("distance {distance} does not apply to {task} tasks")]
    DistanceMismatch {
        distance: &'static str,
        task: &'static str,
    },

    #[error("method {method} cannot train on {targets} targets")]
    TargetMismatch {
        method: &'static str,
        targets: &'static str,
    },

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("mismatched instance sets: {0}")]
    InstanceMismatch(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
