use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error taxonomy mirrored by the CLI exit codes: configuration / invalid
/// input (2), resource caps (3), numerical non-convergence (4).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("failed to converge: {0}")]
    NonConvergence(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Invalid(format!("csv: {other:?}")),
        }
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
    pub fn cap(msg: impl Into<String>) -> Self {
        Error::ResourceCap(msg.into())
    }
    pub fn nonconv(msg: impl Into<String>) -> Self {
        Error::NonConvergence(msg.into())
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) => 2,
            Error::ResourceCap(_) => 3,
            Error::NonConvergence(_) => 4,
            Error::Io(_) => 2,
        }
    }
}
