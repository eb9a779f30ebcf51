use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("non-normalizable state: {0}")]
    NonNormalizable(String),

    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid probe: {0}")]
    InvalidProbe(String),

    #[error("no valid probe in the search range")]
    NoValidProbe,

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("inconsistent observable table: {0}")]
    InconsistentTable(String),

    #[error("numerical failure in {what}: estimate {estimate:e} with error {error:e} after {evals} evaluations")]
    NumericalFailure {
        what: String,
        estimate: f64,
        error: f64,
        evals: usize,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalFailure { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
