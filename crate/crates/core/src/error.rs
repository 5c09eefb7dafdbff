use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A tuning constraint required by the estimator does not hold.
    #[error("configuration error: {constraint} ({detail})")]
    Config {
        constraint: &'static str,
        detail: String,
    },

    /// The recursion produced a NaN or infinite iterate.
    #[error("non-finite iterate at step {step}: last finite theta = {last_theta:?}")]
    NonFinite { step: u64, last_theta: Vec<f64> },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(constraint: &'static str, detail: impl Into<String>) -> Self {
        Error::Config {
            constraint,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
