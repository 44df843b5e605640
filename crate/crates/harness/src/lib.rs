//! Experiment orchestration for the parametric-dither codec: transcript
//! scoring, external-ASR invocation, corpus sweeps, and artifact emission.

pub mod artifacts;
pub mod asr;
pub mod cer;
pub mod cli;
pub mod sweep;

use thiserror::Error;

/// Harness-level errors; codec-level failures pass through.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Codec(#[from] pdqc_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("asr command failed: {0}")]
    Asr(String),

    #[error("asr command timed out after {0} seconds")]
    AsrTimeout(u64),

    #[error("malformed sweep table: {0}")]
    Table(String),

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub(crate) fn io(path: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| HarnessError::Io { path, source }
    }
}
