use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input; `field` names the offending key or parameter.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// Gaussian inputs cannot be enumerated; use the closed-form Gaussian routines.
    #[error("user {user} has Gaussian inputs; discrete-alphabet estimation is unavailable, use the Gaussian closed form instead")]
    GaussianInput { user: usize },

    #[error("bracketing error: {0}")]
    Bracketing(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::GaussianInput { .. }
            | Error::Schema(_)
            | Error::Io(_) => 2,
            Error::Bracketing(_) | Error::Precision(_) | Error::Internal(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
