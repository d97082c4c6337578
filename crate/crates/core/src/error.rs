use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        context: String,
        iterations: usize,
        residual: f64,
    },

    #[error("pseudo-reversing parameter must be non-negative, got {0}")]
    InvalidXi(f64),

    #[error("symbol is not reversible: it vanishes on the unit circle")]
    NotReversible,

    #[error(
        "aliasing detected: coefficient {index} moved by {change:e} when the DFT size was doubled"
    )]
    AliasingDetected { index: i64, change: f64 },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("point outside the injectivity radius{}: {detail}", location(*.layer, *.index))]
    OutOfInjectivityRadius {
        layer: Option<usize>,
        index: Option<usize>,
        detail: String,
    },

    #[error("manifold tags differ: {0} vs {1}")]
    TagMismatch(String, String),

    #[error("empty input")]
    EmptyInput,

    #[error("scaled details leave the injectivity radius at (layer, index) {0:?}")]
    InjectivityViolation(Vec<(usize, usize)>),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn location(layer: Option<usize>, index: Option<usize>) -> String {
    match (layer, index) {
        (Some(l), Some(i)) => format!(" at layer {l}, index {i}"),
        (None, Some(i)) => format!(" at index {i}"),
        (Some(l), None) => format!(" at layer {l}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Attaches a layer/index location to errors raised by per-point routines.
    pub(crate) fn at(self, layer: Option<usize>, index: usize) -> Self {
        match self {
            Error::OutOfInjectivityRadius { detail, .. } => Error::OutOfInjectivityRadius {
                layer,
                index: Some(index),
                detail,
            },
            Error::NonConvergence {
                context,
                iterations,
                residual,
            } => Error::NonConvergence {
                context: match layer {
                    Some(l) => format!("{context} (layer {l}, index {index})"),
                    None => format!("{context} (index {index})"),
                },
                iterations,
                residual,
            },
            other => other,
        }
    }

    /// True for errors caused by malformed input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidXi(_)
                | Error::LengthMismatch(_)
                | Error::TagMismatch(..)
                | Error::EmptyInput
                | Error::Invalid(_)
                | Error::Json(_)
                | Error::InjectivityViolation(_)
                | Error::OutOfInjectivityRadius { .. }
        )
    }
}
