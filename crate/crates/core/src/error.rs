//! Error type shared across the solver stack.
//!
//! Numeric operations never return IEEE infinities or NaN to callers: any
//! overflow, domain violation, or detected loss of all significant digits
//! surfaces as an explicit variant here.

use crate::expr::ParseError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("precision {got} bits is below the supported floor of {min} bits")]
    PrecisionTooLow { got: u32, min: u32 },

    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    #[error("non-finite result in {0} (overflow or invalid operand)")]
    NonFinite(&'static str),

    #[error("insufficient precision in {op}: cancellation consumed {lost} of {have} working bits")]
    PrecisionLoss { op: &'static str, have: u32, lost: u32 },

    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("Müntz grid mismatch: expected q = {expected}, got q = {got}")]
    GridMismatch { expected: u32, got: u32 },

    #[error("exponent {num}/{den} does not lie on the q = {q} grid; q must be a multiple of {den}")]
    OffGrid { num: i64, den: i64, q: u32 },

    #[error("inadmissible exponent {exponent} for Caputo derivative of order {order}")]
    InadmissibleExponent { exponent: String, order: String },

    #[error("Newton iteration for quadrature node {node} of {n} did not converge")]
    NewtonStall { node: usize, n: usize },

    #[error("matrix dimension {got} exceeds the supported bound {max}")]
    DimensionTooLarge { got: usize, max: usize },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid problem: {field}: {msg}")]
    Validation { field: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("problem file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Msg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation { field: field.into(), msg: msg.into() }
    }

    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }
}
