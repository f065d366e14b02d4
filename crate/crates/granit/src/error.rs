use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("invalid override `{0}`: expected KEY=VALUE")]
    OverrideSyntax(String),
    #[error("invalid override `{key}`: {reason}")]
    Override { key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("invalid configuration: {0}")]
    Rejected(#[source] granit_core::Error),
    #[error(transparent)]
    Physics(#[from] granit_core::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl CliError {
    /// 2 for anything the user can fix in the invocation or config, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. }
            | CliError::Parse { .. }
            | CliError::OverrideSyntax(_)
            | CliError::Override { .. }
            | CliError::Invalid(_)
            | CliError::Rejected(_) => 2,
            CliError::Physics(_) | CliError::Write { .. } | CliError::Pool(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
