//! b-bit uniform scalar quantization with saturation, reconstruction, and
//! error-signal extraction.
//!
//! The mid-rise configuration is the default: reconstruction points sit at
//! j*delta + delta/2 with decision thresholds at j*delta, so the codebook
//! has no zero level and is closed under negation. Mid-tread (zero level,
//! thresholds offset by half a step) is available behind the same API.

use crate::error::Error;
use crate::Result;

/// Quantizer topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantizerMode {
    /// No zero output level; reconstruction at j*delta + delta/2.
    #[default]
    MidRise,
    /// Zero output level; reconstruction at j*delta.
    MidTread,
}

impl QuantizerMode {
    pub fn flag(self) -> u8 {
        match self {
            QuantizerMode::MidRise => 0,
            QuantizerMode::MidTread => 1,
        }
    }

    pub fn from_flag(flag: u8) -> Result<Self> {
        match flag {
            0 => Ok(QuantizerMode::MidRise),
            1 => Ok(QuantizerMode::MidTread),
            other => Err(Error::invalid("config", format!("flag must be 0 or 1, got {other}"))),
        }
    }
}

/// b-bit uniform quantizer over the full-scale range (-F, F).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    pub bits: u8,
    pub delta: f64,
    pub mode: QuantizerMode,
    pub full_scale: f64,
}

impl QuantizerConfig {
    /// Mid-rise quantizer with `delta = 2F / 2^b` so the codebook spans
    /// (-F, F).
    pub fn mid_rise(bits: u8, full_scale: f64) -> Result<Self> {
        Self::new(bits, QuantizerMode::MidRise, full_scale)
    }

    pub fn new(bits: u8, mode: QuantizerMode, full_scale: f64) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::invalid("bits", format!("must be in 1..=16, got {bits}")));
        }
        if !full_scale.is_finite() || full_scale <= 0.0 {
            return Err(Error::invalid("full_scale", format!("must be > 0, got {full_scale}")));
        }
        let delta = 2.0 * full_scale / (1u32 << bits) as f64;
        Ok(Self { bits, delta, mode, full_scale })
    }

    /// Rebuild a config from wire fields, where `delta` is authoritative.
    pub fn from_wire(bits: u8, mode: QuantizerMode, delta: f64) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::invalid("bits", format!("must be in 1..=16, got {bits}")));
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
        }
        let full_scale = delta * (1u32 << bits) as f64 / 2.0;
        Ok(Self { bits, delta, mode, full_scale })
    }

    pub fn levels(&self) -> usize {
        1usize << self.bits
    }

    /// Lowest valid bin index.
    pub fn min_index(&self) -> i32 {
        -(1i32 << (self.bits - 1))
    }

    /// Highest valid bin index.
    pub fn max_index(&self) -> i32 {
        (1i32 << (self.bits - 1)) - 1
    }

    /// Reconstruction value for bin `j`.
    pub fn codebook_value(&self, j: i32) -> f64 {
        match self.mode {
            QuantizerMode::MidRise => j as f64 * self.delta + self.delta / 2.0,
            QuantizerMode::MidTread => j as f64 * self.delta,
        }
    }

    /// Lower decision threshold of bin `j`; cells are half-open
    /// [T_j, T_{j+1}), so a sample exactly on a threshold joins the upper
    /// bin.
    pub fn threshold(&self, j: i32) -> f64 {
        match self.mode {
            QuantizerMode::MidRise => j as f64 * self.delta,
            QuantizerMode::MidTread => j as f64 * self.delta - self.delta / 2.0,
        }
    }

    /// All reconstruction values, lowest bin first.
    pub fn codebook(&self) -> Vec<f64> {
        (self.min_index()..=self.max_index()).map(|j| self.codebook_value(j)).collect()
    }

    fn bin_of(&self, y: f64) -> i32 {
        let raw = match self.mode {
            QuantizerMode::MidRise => (y / self.delta).floor(),
            QuantizerMode::MidTread => (y / self.delta + 0.5).floor(),
        };
        // Saturate the overload region to the extreme bins.
        (raw.clamp(self.min_index() as f64, self.max_index() as f64)) as i32
    }
}

/// Quantizer output as bin indices plus the config that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBuffer {
    pub indices: Vec<i32>,
    pub config: QuantizerConfig,
}

impl SymbolBuffer {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Offset of a bin index into a dense 0-based table of size 2^b.
    pub fn dense_offset(config: &QuantizerConfig, j: i32) -> usize {
        (j - config.min_index()) as usize
    }
}

/// Map samples to bin indices; out-of-range samples clip to the extreme
/// bins, non-finite samples are rejected with their position.
pub fn quantize(y: &[f64], cfg: &QuantizerConfig) -> Result<SymbolBuffer> {
    let mut indices = Vec::with_capacity(y.len());
    for (i, &s) in y.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::NonFiniteSample { index: i });
        }
        indices.push(cfg.bin_of(s));
    }
    Ok(SymbolBuffer { indices, config: *cfg })
}

/// Map bin indices back to codebook amplitudes.
pub fn reconstruct(sym: &SymbolBuffer) -> Result<Vec<f64>> {
    let cfg = &sym.config;
    sym.indices
        .iter()
        .map(|&j| {
            if j < cfg.min_index() || j > cfg.max_index() {
                Err(Error::SymbolOutOfRange { index: j, bits: cfg.bits })
            } else {
                Ok(cfg.codebook_value(j))
            }
        })
        .collect()
}

/// Non-subtractive error signal: `x_hat - x`, elementwise.
pub fn error_signal(x: &[f64], x_hat: &[f64]) -> Result<Vec<f64>> {
    if x.len() != x_hat.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: x_hat.len() });
    }
    Ok(x.iter().zip(x_hat).map(|(&a, &b)| b - a).collect())
}
