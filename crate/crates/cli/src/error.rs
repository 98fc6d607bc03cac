//! CLI error type carrying the process exit code:
//! 0 success, 1 validation failure, 2 runtime failure.

use maivar_core::dsp::DspError;
use maivar_core::embed::EmbedError;
use maivar_core::fusion::FusionError;
use maivar_core::img::ImageError;
use maivar_core::neural::NeuralError;
use maivar_core::wav::WavError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad inputs caught before any work: manifests, configs, missing files.
    #[error("{0}")]
    Validation(String),
    /// Failures while processing: I/O, malformed data mid-run.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

macro_rules! runtime_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Runtime(e.to_string())
            }
        })*
    };
}

runtime_from!(DspError, WavError, ImageError, EmbedError, NeuralError, std::io::Error);

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        match e {
            // a clip without both modalities is a dataset problem, caught
            // before training starts
            FusionError::MissingModality(_) | FusionError::Invalid(_) => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
