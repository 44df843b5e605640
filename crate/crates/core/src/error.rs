//! Error type shared by all codec, analysis, and fitting operations.

use thiserror::Error;

/// Errors raised anywhere in the codec/analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// WAV decode failure, naming the offending header field.
    #[error("wav decode error in `{field}`: {detail}")]
    WavFormat { field: String, detail: String },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParam { name: &'static str, detail: String },

    #[error("cannot normalize an all-zero buffer")]
    AllZeroBuffer,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Autocorrelation normalization is undefined for a zero-energy signal.
    #[error("zero-energy error signal: lag-{tau} autocorrelation is undefined")]
    ZeroEnergy { tau: usize },

    #[error("symbol index {index} out of range for {bits}-bit codebook")]
    SymbolOutOfRange { index: i32, bits: u8 },

    /// Quadrature failed to reach the requested absolute tolerance.
    #[error("quadrature did not converge: requested {requested:e}, achieved {achieved:e}")]
    QuadratureTolerance { requested: f64, achieved: f64 },

    #[error("log argument {argument} is not positive; entropy bound undefined")]
    NonPositiveLogArgument { argument: f64 },

    #[error("huffman alphabet is empty or has no symbol with positive probability")]
    EmptyAlphabet,

    #[error("huffman code length {length} exceeds the supported limit")]
    CodeTooLong { length: usize },

    #[error("bitstream truncated: {0}")]
    Truncated(&'static str),

    #[error("bad bitstream field `{field}`: {detail}")]
    BadStream { field: &'static str, detail: String },

    /// Pearson correlation is undefined when either sequence is constant.
    #[error("undefined correlation: {0} has zero variance")]
    ZeroVariance(&'static str),

    #[error("character error rate is undefined for an empty reference")]
    EmptyReference,

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            detail: detail.into(),
        }
    }
}
