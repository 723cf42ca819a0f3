use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("{failed} of {total} checks failed")]
    CheckFailed { failed: usize, total: usize },

    #[error("task `{task}` failed: {source}")]
    Numeric {
        task: &'static str,
        #[source]
        source: poisson_stein::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn numeric(task: &'static str) -> impl FnOnce(poisson_stein::Error) -> Self {
        move |source| CliError::Numeric { task, source }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Schema { .. } => 1,
            CliError::CheckFailed { .. } => 2,
            CliError::Numeric { .. } => 3,
            CliError::Output { .. } => 4,
        })
    }
}
