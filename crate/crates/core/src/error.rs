use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A coordinate that the space (or block) does not have.
    #[error("index {index} is outside the index set of {space}")]
    Domain { index: usize, space: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Exhaustive enumeration or grid budget exceeded.
    #[error("{what}: size {got} exceeds the limit {limit}")]
    Size {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// A growth-function value would exceed the configured digit budget.
    #[error("overflow evaluating {function} at {argument}: more than {budget_digits} decimal digits")]
    Overflow {
        function: String,
        argument: String,
        budget_digits: usize,
    },

    #[error("parse error at byte {position}: expected {expected}, found {found}")]
    Parse {
        position: usize,
        expected: String,
        found: String,
    },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e}) for {what}")]
    Quadrature {
        what: String,
        tol: f64,
        estimate: f64,
    },

    /// A structural invariant of an argument does not hold.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("fit error: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
