use std::path::PathBuf;

/// Errors surfaced by file ingestion and the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("input error: {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("input error: {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical error: {0}")]
    Numerical(#[from] gnlfr_core::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl AppError {
    /// Process exit status: 2 for bad invocations or unreadable input, 1 for
    /// failures during computation or output.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Parse { .. } | AppError::Read { .. } => 2,
            AppError::Numerical(_) | AppError::Output(_) => 1,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        AppError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Output(e.to_string())
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Output(e.to_string())
    }
}

pub type AppResult<T> = Result<T, AppError>;
