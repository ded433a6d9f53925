use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] flatcap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 for anything else (I/O).
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Lib(e) if e.is_validation() => ExitCode::from(2),
            CliError::Lib(_) => ExitCode::from(3),
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => ExitCode::from(1),
        }
    }
}
