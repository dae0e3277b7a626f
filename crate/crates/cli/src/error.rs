use thiserror::Error;

/// Command failure, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: dataset, schema or spec. Exit code 1.
    #[error("{0}")]
    Invalid(String),
    /// Anything that fails after the inputs were accepted. Exit code 2.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<hlvfair::Error> for CliError {
    fn from(e: hlvfair::Error) -> Self {
        use hlvfair::Error as E;
        match e {
            E::MalformedLine { .. }
            | E::UnknownClass { .. }
            | E::UnknownGroup { .. }
            | E::EmptyAnnotations { .. }
            | E::DuplicateId { .. }
            | E::InvalidSchema(_)
            | E::InvalidAnnotation(_)
            | E::InvalidLabelMatrix(_)
            | E::InvalidArgument(_)
            | E::InvalidWeights(_)
            | E::OutOfRange(_)
            | E::DistanceMismatch { .. }
            | E::TargetMismatch { .. } => CliError::Invalid(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
