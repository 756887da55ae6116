use alloc::string::String;
use alloc::vec::Vec;

use crate::grid::Side;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("expected a {expected} grid function, got a {found} one")]
    SideMismatch { expected: Side, found: Side },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("symbol `{label}` cannot be evaluated at {point:?}")]
    NotEvaluable { label: String, point: Vec<f64> },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("input `{id}` is not supported in the declared band (relative leak {leak:e})")]
    NotBandLimited { id: String, leak: f64 },

    #[error(
        "STFT x-stride {stride} too coarse: quadrature error estimate {estimate:.3} exceeds 5%"
    )]
    StrideTooCoarse { stride: usize, estimate: f64 },

    #[error("dyadic partition lower bound {lower_bound:e} on the middle annulus is not positive")]
    DegeneratePartition { lower_bound: f64 },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// The input field an error refers to, for machine-readable reporting.
    pub fn field(&self) -> &'static str {
        match self {
            Error::InvalidParameter { field, .. } => field,
            Error::SideMismatch { .. } => "side",
            Error::GridMismatch(_) => "grid",
            Error::NotEvaluable { .. } | Error::UnknownSymbol(_) => "symbol",
            Error::NotBandLimited { .. } => "band",
            Error::StrideTooCoarse { .. } => "stride",
            Error::DegeneratePartition { .. } => "transition_window",
        }
    }
}
