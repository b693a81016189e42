use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not agree.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A slide produced no patches, so no graph can be built.
    #[error("empty slide: {0} has no patches")]
    EmptySlide(String),

    /// A file was syntactically malformed.
    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },

    /// A file carried a format version this build does not read.
    #[error("{what} version mismatch: expected {expected}, found {found}")]
    Version {
        what: &'static str,
        expected: u32,
        found: u32,
    },

    /// Bad configuration value or file.
    #[error("config: {0}")]
    Config(String),

    /// An input artifact was produced under a different configuration.
    #[error("{path} was produced by config {found}, current config is {expected} (pass --force to accept)")]
    HashMismatch {
        path: String,
        expected: String,
        found: String,
    },

    /// A stage input does not exist yet.
    #[error("missing input {0}; run the earlier pipeline stage first")]
    MissingArtifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
