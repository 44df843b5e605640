//! Low-complexity speech compression built on parametric non-subtractive
//! dithering, low-bit uniform quantization, and Huffman coding, together
//! with the analysis toolkit (error metrics, symbol entropy, rate bounds)
//! and the trade-off fitting procedures used to pick dither parameters.
//!
//! Pipeline: `signal` loads/normalizes audio (or synthesizes Laplacian
//! sources), `dither` draws the parametric dither, `quantizer` maps the
//! dithered signal to bin indices, `rate` entropy-codes them, and `codec`
//! wraps everything in a self-describing bitstream. `analysis` measures
//! the quantization error (MSE, lag autocorrelation, smoothed PSD) and
//! `fit` turns swept measurements into model weights and operating points.

pub mod analysis;
pub mod codec;
pub mod dither;
pub mod error;
pub mod fit;
pub mod quantizer;
pub mod rate;
pub mod signal;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
