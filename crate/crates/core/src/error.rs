use thiserror::Error;

/// Errors raised by the representation-theory toolkit, the channel calculus
/// and the circuit constructions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid partition {0:?}: parts must be positive and non-increasing")]
    InvalidPartition(Vec<usize>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: String,
        needed: usize,
        budget: usize,
    },

    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),

    #[error("not a valid density operator: {0}")]
    InvalidState(String),

    #[error("not a valid channel: {0}")]
    InvalidChannel(String),

    #[error("Kraus rank {kraus_rank} exceeds the promised bound r = {bound}")]
    PromiseViolation { kraus_rank: usize, bound: usize },

    #[error("formula assumption violated: {what} (residual {residual:.3e})")]
    FormulaAssumption { what: String, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("payload leakage outside the valid label subspace (weight {0:.3e})")]
    Leakage(f64),

    #[error("causality violated at tooth {tooth} (residual {residual:.3e})")]
    Causality { tooth: usize, residual: f64 },

    #[error("invalid rank parameter: {0}")]
    InvalidRank(String),

    #[error("unknown construction or suite `{0}`")]
    Unknown(String),
}

pub type Result<T> = std::result::Result<T, Error>;
