use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error ({constraint}): {detail}")]
    Config { constraint: String, detail: String },
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn config(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::Config {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }

    /// Process exit status: 2 for bad configuration, 3 for a diverging run.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) | Self::Csv(_) => 1,
        }
    }
}

impl From<mlsa_core::Error> for HarnessError {
    fn from(e: mlsa_core::Error) -> Self {
        match e {
            mlsa_core::Error::Config { constraint, detail } => Self::config(constraint, detail),
            mlsa_core::Error::Domain(msg) => Self::config("domain", msg),
            e @ mlsa_core::Error::NonFinite { .. } => Self::Numerical(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
