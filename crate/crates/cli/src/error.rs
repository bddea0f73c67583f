use std::process::ExitCode;

use resilience_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Core(#[from] Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    /// 2 usage or parse, 3 resource limit, 4 construction, 1 anything else.
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Core(Error::Resource { .. }) => 3,
            CliError::Core(Error::Construction(_) | Error::ParityUnfixable) => 4,
            CliError::Core(Error::Fit(_)) | CliError::Io { .. } | CliError::Mismatch(_) => 1,
            CliError::Core(_) => 2,
        })
    }
}
