use thiserror::Error;

/// Failure classes surfaced by the library.
///
/// The split between input and domain errors matters to the CLI, which maps
/// them to distinct exit codes.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument {value} outside domain [{low}, {high}] of {what}")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("tail bound vanishes at {at}: G(x) = 0")]
    ZeroTail { at: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("hypothesis construction failed: {0}")]
    Construction(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures caused by a well-formed request hitting a
    /// mathematical domain limit (as opposed to malformed input).
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::OutOfDomain { .. } | Error::ZeroTail { .. } | Error::Construction(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Schema(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
