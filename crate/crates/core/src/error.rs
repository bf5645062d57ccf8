use thiserror::Error;

/// Every failure the toolkit reports. Numeric variants carry the margin by
/// which the violated invariant was missed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    #[error("not Hermitian: max |rho - rho^dagger| = {margin:e}")]
    NotHermitian { margin: f64 },

    #[error("trace not one: |tr - 1| = {margin:e}")]
    TraceNotOne { margin: f64 },

    #[error("not positive semidefinite: smallest eigenvalue {margin:e}")]
    NotPositive { margin: f64 },

    #[error("bad rank {rank} for total dimension {dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("not special unitary: {0}")]
    NotSpecialUnitary(String),

    #[error("not special orthogonal: {0}")]
    NotSpecialOrthogonal(String),

    #[error("inconsistent traces: {0}")]
    InconsistentTraces(String),

    #[error("degenerate spectrum: det of Vandermonde matrix {det:e}")]
    DegenerateSpectrum { det: f64 },

    #[error("sign invariant {name} vanishes: |{name}| = {value:e}")]
    ZeroSignInvariant { name: String, value: f64 },

    #[error("negative square in recovered component {index}: {value:e}")]
    NegativeSquare { index: usize, value: f64 },

    #[error("singular tensor-product system: |det| = {det:e}")]
    SingularSystem { det: f64 },

    #[error("constraint violated: {what} (margin {margin:e})")]
    ConstraintViolation { what: String, margin: f64 },
}

impl Error {
    /// Parse-type errors, as opposed to validation or numerical failures.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io(_))
    }

    /// Errors raised by a state or operator failing one of its defining invariants.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::ShapeMismatch(_)
                | Error::UnsupportedShape(_)
                | Error::NotHermitian { .. }
                | Error::TraceNotOne { .. }
                | Error::NotPositive { .. }
                | Error::BadRank { .. }
                | Error::NotSpecialUnitary(_)
                | Error::NotSpecialOrthogonal(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
