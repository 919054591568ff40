use thiserror::Error;

/// Failure classes shared by every operation in the crate.
///
/// The CLI maps these onto process exit codes, see [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("degenerate problem: {0}")]
    Degeneracy(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 1 for input/parameter errors, 2 for numerical trouble, 3 for violated preconditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Parameter(_) | Error::Io(_) => 1,
            Error::Numeric(_) | Error::Degeneracy(_) | Error::Divergence(_) => 2,
            Error::Precondition(_) => 3,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Input(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
