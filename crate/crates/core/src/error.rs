use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {n} exceeds the limit {max} for this operation")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid truth table: {0}")]
    InvalidTable(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex iteration limit ({0}) reached")]
    IterationLimit(usize),

    #[error("no weight-one point left to flip (iteration {iteration}, sigma {sigma})")]
    NoWeightOnePoint { iteration: usize, sigma: i64 },

    #[error("flip budget exhausted with sigma {sigma} > 0 after {flipped} flipped points")]
    BudgetExhausted { sigma: i64, flipped: usize },

    #[error("high-degree part of the thresholded function vanishes")]
    DegenerateHighPart,

    #[error("function is not balanced: mean {0}")]
    Unbalanced(f64),

    #[error("design degree {design} exceeds resilience order {resilience}")]
    ResilienceMismatch { design: usize, resilience: usize },

    #[error("empty comparison class")]
    EmptyClass,

    #[error("certificate violation: {0}")]
    Certificate(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
