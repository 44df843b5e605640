//! Audio sample I/O, normalization/trimming, and synthetic Laplacian
//! sources for desk-scale experiments.
//!
//! Only 16-bit linear PCM RIFF/WAVE files are accepted; compressed WAV
//! variants are rejected with an error naming the offending header field.
//! Multi-channel input is mixed down by averaging. Sample rates pass
//! through untouched (the downstream ASR front-end resamples internally).

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::Result;

/// Sample rate used for synthetic sources, matching the corpus material.
pub const SYNTH_SAMPLE_RATE: u32 = 48_000;

/// A mono buffer of real amplitudes, nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    /// Free-form identifier (speaker/script id).
    pub label: String,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32, label: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("audio buffer"));
        }
        if sample_rate == 0 {
            return Err(Error::invalid("sample_rate", "must be positive"));
        }
        Ok(Self {
            samples,
            sample_rate,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Peak absolute amplitude.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &s| m.max(s.abs()))
    }
}

/// Seeded Laplace(mu, c) source; identical seed and parameters reproduce
/// the identical sample stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacianSource {
    pub mu: f64,
    /// Scale parameter; the variance is 2c^2.
    pub c: f64,
    pub seed: u64,
}

impl LaplacianSource {
    pub fn new(mu: f64, c: f64, seed: u64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::invalid("c", format!("scale must be > 0, got {c}")));
        }
        if !mu.is_finite() {
            return Err(Error::invalid("mu", format!("must be finite, got {mu}")));
        }
        Ok(Self { mu, c, seed })
    }
}

// ---------------------------------------------------------------------------
// Synthetic source
// ---------------------------------------------------------------------------

/// Draw `n` iid Laplace(mu, c) samples by inverse-CDF transform.
///
/// One uniform per sample, no rejection loop. The buffer is tagged with
/// [`SYNTH_SAMPLE_RATE`].
pub fn sample_laplacian(src: &LaplacianSource, n: usize) -> Result<AudioBuffer> {
    if n == 0 {
        return Err(Error::invalid("n", "sample count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(src.seed);
    let samples = (0..n).map(|_| laplace_inverse_cdf(&mut rng, src.mu, src.c)).collect();
    AudioBuffer::new(samples, SYNTH_SAMPLE_RATE, format!("laplace-{:#x}", src.seed))
}

fn laplace_inverse_cdf(rng: &mut impl Rng, mu: f64, c: f64) -> f64 {
    // t in [-1, 1); nudge the single excluded endpoint off -1 so ln stays finite.
    let mut t = 2.0 * rng.random::<f64>() - 1.0;
    if t <= -1.0 {
        t = -1.0 + f64::EPSILON;
    }
    if t < 0.0 {
        mu + c * (1.0 + t).ln()
    } else {
        mu - c * (1.0 - t).ln()
    }
}

/// Maximum-likelihood Laplace fit: location = sample median, scale = mean
/// absolute deviation from it.
pub fn laplace_mle(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("laplace fit"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    let mu = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let c = samples.iter().map(|&x| (x - mu).abs()).sum::<f64>() / n as f64;
    Ok((mu, c))
}

// ---------------------------------------------------------------------------
// Normalization / trimming
// ---------------------------------------------------------------------------

/// Trim to the first `duration_s` seconds, then peak-normalize so the
/// maximum absolute amplitude is exactly 1.0.
pub fn normalize_trim(buf: &AudioBuffer, duration_s: f64) -> Result<AudioBuffer> {
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(Error::invalid("duration_s", format!("must be > 0, got {duration_s}")));
    }
    let want = (duration_s * buf.sample_rate as f64).round() as usize;
    let keep = buf.len().min(want.max(1));
    let mut samples = buf.samples[..keep].to_vec();
    let peak = samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    if peak == 0.0 {
        return Err(Error::AllZeroBuffer);
    }
    for s in &mut samples {
        *s /= peak;
    }
    AudioBuffer::new(samples, buf.sample_rate, buf.label.clone())
}

// ---------------------------------------------------------------------------
// WAV i/o (RIFF, 16-bit linear PCM only)
// ---------------------------------------------------------------------------

const PCM_FULL_SCALE: f64 = 32768.0;

/// Read a 16-bit linear PCM WAV file; multi-channel frames are averaged
/// down to mono and samples are scaled to [-1, 1) by 2^15.
pub fn load_pcm(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_wav(&bytes, label)
}

fn decode_wav(bytes: &[u8], label: String) -> Result<AudioBuffer> {
    let bad = |field: &str, detail: String| Error::WavFormat {
        field: field.to_string(),
        detail,
    };
    if bytes.len() < 12 {
        return Err(bad("riff", format!("file too short ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(bad("riff", "missing RIFF tag".into()));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(bad("wave", "missing WAVE tag".into()));
    }

    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None; // (audio_format, channels, rate, bits)
    let mut data: Option<&[u8]> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).filter(|&e| e <= bytes.len());
        let body_end = match body_end {
            Some(e) => e,
            None => {
                return Err(bad(
                    "chunk_size",
                    format!("chunk {:?} overruns file", String::from_utf8_lossy(id)),
                ))
            }
        };
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(bad("fmt ", format!("chunk too short ({size} bytes)")));
                }
                let b = &bytes[body_start..body_end];
                let audio_format = u16::from_le_bytes([b[0], b[1]]);
                let channels = u16::from_le_bytes([b[2], b[3]]);
                let rate = u32::from_le_bytes([b[4], b[5], b[6], b[7]]);
                let bits = u16::from_le_bytes([b[14], b[15]]);
                fmt = Some((audio_format, channels, rate, bits));
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {} // skip LIST, fact, cue, ...
        }
        // chunks are word-aligned
        pos = body_end + (size & 1);
    }

    let (audio_format, channels, rate, bits) =
        fmt.ok_or_else(|| bad("fmt ", "missing fmt chunk".into()))?;
    if audio_format != 1 {
        return Err(bad(
            "audio_format",
            format!("only linear PCM (1) is supported, got {audio_format}"),
        ));
    }
    if bits != 16 {
        return Err(bad("bits_per_sample", format!("only 16-bit PCM is supported, got {bits}")));
    }
    if channels == 0 {
        return Err(bad("channels", "zero channels".into()));
    }
    if rate == 0 {
        return Err(bad("sample_rate", "zero sample rate".into()));
    }
    let data = data.ok_or_else(|| bad("data", "missing data chunk".into()))?;
    let frame_bytes = 2 * channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(bad(
            "data",
            format!("size {} is not a whole number of {channels}-channel frames", data.len()),
        ));
    }
    let frames = data.len() / frame_bytes;
    if frames == 0 {
        return Err(bad("data", "empty data chunk".into()));
    }

    let mut samples = Vec::with_capacity(frames);
    for f in 0..frames {
        let mut acc = 0.0;
        for ch in 0..channels as usize {
            let o = f * frame_bytes + 2 * ch;
            acc += i16::from_le_bytes([data[o], data[o + 1]]) as f64;
        }
        samples.push(acc / channels as f64 / PCM_FULL_SCALE);
    }
    AudioBuffer::new(samples, rate, label)
}

/// Write a mono 16-bit PCM WAV file. Amplitudes are scaled by 2^15 and
/// rounded to nearest (ties away from zero), then clamped to i16 range.
pub fn write_pcm(path: impl AsRef<Path>, buf: &AudioBuffer) -> Result<()> {
    let mut out = Vec::with_capacity(44 + 2 * buf.len());
    let data_len = (2 * buf.len()) as u32;
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&buf.sample_rate.to_le_bytes());
    out.extend_from_slice(&(buf.sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &buf.samples {
        out.extend_from_slice(&amplitude_to_i16(s).to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

/// Scale to 2^15 and round to nearest, ties away from zero.
pub fn amplitude_to_i16(s: f64) -> i16 {
    (s * PCM_FULL_SCALE).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}
