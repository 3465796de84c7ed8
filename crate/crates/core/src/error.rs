use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("singular matrix in {context} (condition number {condition:e})")]
    SingularMatrix { context: &'static str, condition: f64 },

    #[error("eigen decomposition failed to converge")]
    EigenNoConvergence,

    #[error("time grid must be nonempty and strictly increasing")]
    InvalidTimeGrid,

    #[error("quotient out of floating-point range at t = {time}: log-deviation {value}")]
    QuotientRange { time: f64, value: f64 },

    #[error(
        "target log-quotients are not in Im(S^T): residual {residual:e} exceeds {tolerance:e} \
         (a reaction-cycle constraint is violated)"
    )]
    Unachievable { residual: f64, tolerance: f64 },

    #[error("infeasible totals: no positive concentrations match the conserved totals ({reason})")]
    InfeasibleTotals { reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure in {operation}: {reason}")]
    Numerical {
        operation: &'static str,
        reason: String,
    },
}

impl Error {
    /// Bad input (configuration, dimensions, parameter domains) as opposed to
    /// a failure of a numerical procedure on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotSquare { .. }
                | Error::InvalidParameter { .. }
                | Error::NonFinite(_)
                | Error::InvalidNetwork(_)
                | Error::InvalidTimeGrid
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
