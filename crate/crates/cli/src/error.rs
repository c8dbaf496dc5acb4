use std::path::Path;

use blinkwatch_core::cascade::{CascadeError, LegacyXmlError, ModelFormatError};
use blinkwatch_core::drowsiness::DrowsinessError;
use blinkwatch_core::eval::EvalError;
use blinkwatch_core::imaging::ImagingError;
use thiserror::Error;

/// Process exit status for each failure class. Stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    Usage = 2,
    Io = 3,
    Data = 4,
}

#[derive(Debug, Error)]
#[error("{message}")]
pub struct CliError {
    pub class: ExitClass,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            class: ExitClass::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            class: ExitClass::Data,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError {
            class: ExitClass::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.class as u8
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        match e {
            CascadeError::BadParams(_) => CliError::usage(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<DrowsinessError> for CliError {
    fn from(e: DrowsinessError) -> Self {
        match e {
            DrowsinessError::BadConfig(_) => CliError::usage(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match &e {
            EvalError::Io { .. } => CliError {
                class: ExitClass::Io,
                message: e.to_string(),
            },
            _ => CliError::data(e.to_string()),
        }
    }
}

pub fn model_error(path: &Path, e: impl Into<ModelLoadError>) -> CliError {
    CliError::data(format!("{}: {}", path.display(), e.into()))
}

pub fn image_error(path: &Path, e: ImagingError) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Error)]
pub enum ModelLoadError {
    #[error(transparent)]
    Native(#[from] ModelFormatError),
    #[error(transparent)]
    Xml(#[from] LegacyXmlError),
}
