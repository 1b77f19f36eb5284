use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Tensor { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {message}")]
    Manifest { field: String, message: String },
    #[error("{field}: {message}")]
    Config { field: String, message: String },
    #[error("missing artifact {0}; run the upstream command first")]
    MissingArtifact(PathBuf),
    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] actpath_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Shape of the JSON object printed on stderr when a command fails.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn manifest(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Manifest {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Tensor { .. } => "tensor",
            Error::Parse { .. } => "parse",
            Error::Manifest { .. } => "manifest",
            Error::Config { .. } => "config",
            Error::MissingArtifact(_) => "missing_artifact",
            Error::Artifact { .. } => "artifact",
            Error::Core(_) => "invalid_input",
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (field, path) = match self {
            Error::Manifest { field, .. } | Error::Config { field, .. } => (Some(field.clone()), None),
            Error::Io { path, .. }
            | Error::Tensor { path, .. }
            | Error::Parse { path, .. }
            | Error::Artifact { path, .. }
            | Error::MissingArtifact(path) => (None, Some(path.display().to_string())),
            Error::Core(actpath_core::Error::Invalid { field, .. }) => (Some(field.to_string()), None),
            Error::Core(_) => (None, None),
        };
        ErrorReport {
            kind: self.kind(),
            field,
            path,
            message: self.to_string(),
        }
    }
}
