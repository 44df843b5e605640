//! End-to-end encode/decode: sum input and dither, quantize, Huffman-code,
//! and package everything in a self-describing bitstream.
//!
//! The header carries every parameter the decoder needs (bit depth, step,
//! quantizer configuration, dither family and amount, sample rate, sample
//! count, and the Huffman codeword lengths); the dither realization itself
//! is never stored, and the decoder performs no dither subtraction.
//!
//! Wire layout, little-endian multi-byte fields:
//!
//! ```text
//! magic "PDQC" | version u8 | bits u8 | config u8 | m u8 | alpha u16
//! | delta f64 | sample_rate u32 | n u48 | 2^bits codeword lengths (u8)
//! | payload bits, zero-padded to a byte boundary
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dither::{DitherFamily, DitherSpec};
use crate::error::Error;
use crate::quantizer::{self, QuantizerConfig, QuantizerMode, SymbolBuffer};
use crate::rate::{self, HuffmanCode};
use crate::signal::AudioBuffer;
use crate::Result;

pub const MAGIC: [u8; 4] = *b"PDQC";
pub const VERSION: u8 = 1;
const MAX_SAMPLES: u64 = 1 << 48;

/// A decoded header plus the Huffman payload.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedStream {
    pub bits: u8,
    pub mode: QuantizerMode,
    pub family: DitherFamily,
    /// Dither amount as stored: `round(alpha * 65535)`.
    pub alpha_fixed: u16,
    pub delta: f64,
    pub sample_rate: u32,
    pub n: u64,
    pub code_lengths: Vec<u8>,
    pub payload: Vec<u8>,
    /// Payload length in bits. Exact for streams built by [`encode`]; for
    /// streams parsed off the wire this is the padded byte length times 8
    /// (the true count is at most 7 bits lower).
    pub payload_bits: u64,
}

impl EncodedStream {
    pub fn alpha(&self) -> f64 {
        self.alpha_fixed as f64 / 65535.0
    }

    pub fn quantizer_config(&self) -> Result<QuantizerConfig> {
        QuantizerConfig::from_wire(self.bits, self.mode, self.delta)
    }

    /// Serialize to the wire format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(28 + self.code_lengths.len() + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.bits);
        out.push(self.mode.flag());
        out.push(self.family.index());
        out.extend_from_slice(&self.alpha_fixed.to_le_bytes());
        out.extend_from_slice(&self.delta.to_le_bytes());
        out.extend_from_slice(&self.sample_rate.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes()[..6]);
        out.extend_from_slice(&self.code_lengths);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parse the wire format, validating every header field.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let take = |pos: &mut usize, k: usize| -> Result<&[u8]> {
            if *pos + k > bytes.len() {
                return Err(Error::Truncated("header ends early"));
            }
            let s = &bytes[*pos..*pos + k];
            *pos += k;
            Ok(s)
        };

        if take(&mut pos, 4)? != MAGIC {
            return Err(Error::BadStream { field: "magic", detail: "expected PDQC".into() });
        }
        let version = take(&mut pos, 1)?[0];
        if version != VERSION {
            return Err(Error::BadStream {
                field: "version",
                detail: format!("expected {VERSION}, got {version}"),
            });
        }
        let bits = take(&mut pos, 1)?[0];
        if !(1..=16).contains(&bits) {
            return Err(Error::BadStream { field: "bits", detail: format!("got {bits}") });
        }
        let mode = QuantizerMode::from_flag(take(&mut pos, 1)?[0])
            .map_err(|e| Error::BadStream { field: "config", detail: e.to_string() })?;
        let family = DitherFamily::from_index(take(&mut pos, 1)?[0])
            .map_err(|e| Error::BadStream { field: "m", detail: e.to_string() })?;
        let alpha_fixed = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap());
        let delta = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::BadStream { field: "delta", detail: format!("got {delta}") });
        }
        let sample_rate = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if sample_rate == 0 {
            return Err(Error::BadStream { field: "sample_rate", detail: "zero".into() });
        }
        let mut n_bytes = [0u8; 8];
        n_bytes[..6].copy_from_slice(take(&mut pos, 6)?);
        let n = u64::from_le_bytes(n_bytes);

        let alphabet = 1usize << bits;
        let code_lengths = take(&mut pos, alphabet)?.to_vec();
        // Reject undecodable headers here rather than at first use.
        HuffmanCode::from_lengths(&code_lengths)?;
        let payload = bytes[pos..].to_vec();
        let payload_bits = payload.len() as u64 * 8;

        Ok(Self {
            bits,
            mode,
            family,
            alpha_fixed,
            delta,
            sample_rate,
            n,
            code_lengths,
            payload,
            payload_bits,
        })
    }
}

/// Dither, quantize, and entropy-code `x`; the Huffman table is built from
/// this stream's own empirical symbol distribution.
pub fn encode(x: &AudioBuffer, spec: &DitherSpec, cfg: &QuantizerConfig) -> Result<EncodedStream> {
    if (spec.delta - cfg.delta).abs() > 1e-12 * cfg.delta.max(1.0) {
        return Err(Error::invalid(
            "delta",
            format!("dither step {} != quantizer step {}", spec.delta, cfg.delta),
        ));
    }
    if x.len() as u64 >= MAX_SAMPLES {
        return Err(Error::invalid("n", format!("{} samples overflow the 48-bit count", x.len())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let v = spec.sample_with(&mut rng, x.len());
    let y: Vec<f64> = x.samples.iter().zip(&v).map(|(a, b)| a + b).collect();
    let symbols = quantizer::quantize(&y, cfg)?;

    let dist = rate::empirical_bin_probs(&symbols)?;
    let code = HuffmanCode::build(&dist)?;
    let offsets: Vec<usize> = symbols
        .indices
        .iter()
        .map(|&j| SymbolBuffer::dense_offset(cfg, j))
        .collect();
    let (payload, payload_bits) = code.encode(&offsets)?;

    Ok(EncodedStream {
        bits: cfg.bits,
        mode: cfg.mode,
        family: spec.family,
        alpha_fixed: (spec.alpha * 65535.0).round() as u16,
        delta: cfg.delta,
        sample_rate: x.sample_rate,
        n: x.len() as u64,
        code_lengths: code.lengths().to_vec(),
        payload,
        payload_bits,
    })
}

/// Huffman-decode the payload and reconstruct codebook amplitudes; no
/// dither state is consulted.
pub fn decode(stream: &EncodedStream) -> Result<AudioBuffer> {
    let cfg = stream.quantizer_config()?;
    let code = HuffmanCode::from_lengths(&stream.code_lengths)?;
    let offsets = code.decode(&stream.payload, stream.n as usize)?;
    let min_index = cfg.min_index();
    let indices: Vec<i32> = offsets.iter().map(|&o| o as i32 + min_index).collect();
    let symbols = SymbolBuffer { indices, config: cfg };
    let samples = quantizer::reconstruct(&symbols)?;
    AudioBuffer::new(samples, stream.sample_rate, "decoded")
}

/// Decode straight from wire bytes.
pub fn decode_bytes(bytes: &[u8]) -> Result<AudioBuffer> {
    decode(&EncodedStream::from_bytes(bytes)?)
}
