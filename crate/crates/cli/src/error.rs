use std::io;

use encircle::EncircleError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    Model(#[from] EncircleError),
    #[error("config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), reason: reason.into() }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Self::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn is_validation(&self) -> bool {
        match self {
            Self::Invalid { .. } | Self::Parse(_) => true,
            Self::Model(e) => matches!(
                e,
                EncircleError::InvalidSpec { .. } | EncircleError::MissingCustomMatrix | EncircleError::OutOfRange { .. }
            ),
            Self::Io { .. } => false,
        }
    }

    /// 2 for bad input, 3 for numerical breakdown, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            _ if self.is_validation() => 2,
            Self::Io { .. } => 1,
            _ => 3,
        }
    }

    pub fn field(&self) -> Option<String> {
        match self {
            Self::Invalid { field, .. } => Some(field.clone()),
            Self::Model(EncircleError::InvalidSpec { field, .. }) => Some(field.to_string()),
            Self::Model(EncircleError::MissingCustomMatrix) => Some("hamiltonian.custom_matrix".into()),
            _ => None,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let kind = match self.exit_code() {
            2 => "validation",
            3 => "numeric",
            _ => "io",
        };
        ErrorReport { kind, field: self.field(), message: self.to_string(), exit_code: self.exit_code() }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
    pub exit_code: i32,
}

pub type CliResult<T> = std::result::Result<T, CliError>;
