use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed rational `{0}`")]
    Rational(String),
    #[error("malformed polynomial `{input}`: {reason}")]
    Polynomial { input: String, reason: String },
}

/// Errors raised by the algebraic operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown catalog algebra `{0}`")]
    UnknownName(String),
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("operation requires dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("coefficient of e^{monomial} is not divisible by nu^{power}")]
    NonInvertibleCoefficient { monomial: String, power: u32 },
    #[error("matrix is not classically idempotent")]
    NotClassicallyIdempotent,
    #[error("degree budget exceeded: {needed} > {budget}")]
    DegreeBudgetExceeded { needed: usize, budget: usize },
    #[error("function leaves the declared class: {0}")]
    ClassViolation(String),
    #[error("no inner-derivation solution at lambda^{order}: {obstruction}")]
    NoSolution { order: u32, obstruction: String },
    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
