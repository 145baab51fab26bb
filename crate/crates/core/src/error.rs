use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed its configured budget.
    #[error("resource budget exceeded: {what} requires {required}, budget is {budget}")]
    Resource {
        what: String,
        required: u128,
        budget: u128,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An internal invariant failed. Indicates a bug, not bad input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn resource(what: impl Into<String>, required: u128, budget: u128) -> Self {
        Error::Resource {
            what: what.into(),
            required,
            budget,
        }
    }
}
