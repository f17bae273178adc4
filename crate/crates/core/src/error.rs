use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0}")]
    InvalidParams(String),

    #[error("symbol {symbol} out of range for alphabet of size {r}")]
    SymbolOutOfRange { symbol: u8, r: usize },

    #[error("word is not admissible: run of length > {k} at position {position}")]
    Inadmissible { k: usize, position: usize },

    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("shape mismatch: expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("strand {strand} does not embed in the reference (symbol {position} unmatched)")]
    NotASupersequence { strand: usize, position: usize },

    #[error("no edge from state {from} to state {to}")]
    NoSuchEdge { from: usize, to: usize },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("singular linear system for target edge {0}")]
    SingularSystem(usize),

    #[error("invalid reference: {0}")]
    InvalidReference(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::SymbolOutOfRange { .. }
                | Error::Inadmissible { .. }
                | Error::ShapeMismatch { .. }
                | Error::NoSuchEdge { .. }
                | Error::InvalidReference(_)
                | Error::Parse(_)
                | Error::TooLarge(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
