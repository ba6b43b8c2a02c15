use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operation not supported for the {0} representation")]
    UnsupportedRepresentation(&'static str),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("integration range exceeded at lambda = {lambda}")]
    RangeExceeded { lambda: Complex64 },

    #[error("function vanishes on or near the contour (|f|min/|f|max = {ratio:.3e})")]
    ZeroOnContour { ratio: f64 },

    #[error("root count mismatch in {region}: argument principle gives {expected}, search found {found}")]
    CountMismatch {
        region: String,
        expected: usize,
        found: usize,
    },

    #[error("no root in the admissible region: {0}")]
    RootEscape(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("coupling {gamma} outside the validated bracket [{lo}, {hi}]")]
    OutsideBracket { gamma: f64, lo: f64, hi: f64 },

    #[error("unresolved transition near lambda = {0} after maximal grid refinement")]
    Unresolved(f64),

    #[error("backend {backend} cannot evaluate a {kind} potential")]
    BackendMismatch {
        backend: &'static str,
        kind: &'static str,
    },
}

impl Error {
    /// Validation errors are caller mistakes; everything else is a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::UnsupportedRepresentation(_)
                | Error::InvalidPotential(_)
                | Error::Domain(_)
                | Error::OutsideBracket { .. }
                | Error::BackendMismatch { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
