//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's arguments was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A sample or intermediate value left the numeric domain (NaN, infinity,
    /// negative density, ...).
    #[error("numeric domain: {0}")]
    NumericDomain(String),

    /// The requested bound level does not exist in the potential.
    #[error("no such bound level: {0}")]
    NotFound(String),

    /// An iteration failed to converge or the grid cannot resolve the state.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// Strict shell filling was requested for a particle count that is not a
    /// shell closure.
    #[error("N = {n} is not a shell closure; nearest closures are {below} and {above}")]
    OpenShell { n: u32, below: u32, above: u32 },

    /// A text input (config or density table) could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input data is well-formed but inconsistent (bad normalization,
    /// negative density, unit mismatch).
    #[error("data integrity: {0}")]
    DataIntegrity(String),

    /// Too few data points for the requested fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The fit design matrix is singular (e.g. all abscissae equal).
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// A grid does not cover the support of the function sampled on it.
    #[error("domain coverage: {0}")]
    DomainCoverage(String),

    /// The Boltzmann-analogy constants are undefined for this fit (b <= 0).
    #[error("undefined analogy: {0}")]
    UndefinedAnalogy(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for data problems, 3 for numerical
    /// failures. Code 1 (usage) is assigned by the CLI itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::OpenShell { .. }
            | Error::Parse { .. }
            | Error::DataIntegrity(_)
            | Error::InsufficientData(_)
            | Error::DegenerateDesign(_)
            | Error::Io(_) => 2,
            Error::NumericDomain(_)
            | Error::NotFound(_)
            | Error::NumericalFailure(_)
            | Error::DomainCoverage(_)
            | Error::UndefinedAnalogy(_) => 3,
        }
    }
}
