// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    /// A configuration value is invalid; `path` is the dotted key.
    #[error("invalid `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] skyrmion_core::Error),
    #[error("unknown figure `{0}` (expected one of 2e, 2g, 2h, 3, 4e, 5b, 5c)")]
    UnknownFigure(String),
    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn validation(path: impl Into<String>, message: impl ToString) -> Self {
        LabError::Validation {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| LabError::Io { path, source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Self {
        let path = path.into();
        move |source| LabError::Csv { path, source }
    }

    /// Process exit code: 2 for invalid input, 3 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Validation { .. } | LabError::Parse(_) | LabError::Core(_) | LabError::UnknownFigure(_) => 2,
            LabError::MissingArtifact(_) | LabError::Io { .. } | LabError::Csv { .. } | LabError::Json(_) => 3,
        }
    }
}
