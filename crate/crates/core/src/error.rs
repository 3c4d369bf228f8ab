use thiserror::Error;

/// Errors raised by the game engine, the learning driver and the analysis tools.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or inconsistent input (dimension mismatch, index out of range, NaN, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    /// The linear-programming backend hit its iteration cap.
    #[error("LP solver failure: {0}")]
    Solver(String),

    /// An enumeration would exceed the configured budget.
    #[error("resource budget exceeded: {required} items requested, budget is {budget}")]
    Budget { required: u128, budget: u128 },

    /// A diagnostic could not be computed from the supplied data.
    #[error("diagnostic unavailable: {0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
