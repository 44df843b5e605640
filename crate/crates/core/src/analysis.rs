//! Quantization-error metrics: MSE, lag autocorrelation, and smoothed
//! periodogram PSD.
//!
//! The error signal is treated as quasi-WSS, so the autocorrelation is
//! estimated over the whole buffer with the biased (full-energy)
//! normalization. The periodogram is an analysis-side tool only; the codec
//! path itself stays transform-free.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::dither::DitherSpec;
use crate::error::Error;
use crate::quantizer::{self, QuantizerConfig};
use crate::Result;

/// Error metrics for one (signal, dither, quantizer) run.
#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub mse: f64,
    /// Lag -> normalized autocorrelation.
    pub acf: BTreeMap<usize, f64>,
    /// One-sided smoothed periodogram, DC bin first.
    pub psd: Vec<f64>,
    pub smooth_window: usize,
    pub n: usize,
}

impl ErrorReport {
    /// Raw lag autocovariance `ACF_tau * MSE`, the unnormalized form used
    /// by the performance model.
    pub fn autocovariance(&self, tau: usize) -> Option<f64> {
        self.acf.get(&tau).map(|a| a * self.mse)
    }

    /// PSD rows as `frequency_hz,power` lines given the originating sample
    /// rate.
    pub fn psd_csv(&self, sample_rate: u32) -> String {
        let mut out = String::from("frequency_hz,power\n");
        for (k, p) in self.psd.iter().enumerate() {
            let f = k as f64 * sample_rate as f64 / self.n as f64;
            out.push_str(&format!("{f},{p}\n"));
        }
        out
    }
}

/// Mean squared value: `(1/N) * sum(eps^2)`.
pub fn mse(eps: &[f64]) -> Result<f64> {
    if eps.is_empty() {
        return Err(Error::EmptyInput("mse"));
    }
    Ok(eps.iter().map(|e| e * e).sum::<f64>() / eps.len() as f64)
}

/// Biased lag-`tau` autocorrelation, normalized by the full-overlap energy:
/// `sum_{n<N-tau} eps_n * eps_{n+tau} / sum_n eps_n^2`.
pub fn acf_tau(eps: &[f64], tau: usize) -> Result<f64> {
    if eps.len() <= tau {
        return Err(Error::invalid(
            "tau",
            format!("lag {tau} needs more than {tau} samples, got {}", eps.len()),
        ));
    }
    let energy: f64 = eps.iter().map(|e| e * e).sum();
    if energy <= 0.0 {
        return Err(Error::ZeroEnergy { tau });
    }
    let lagged: f64 = eps[..eps.len() - tau].iter().zip(&eps[tau..]).map(|(a, b)| a * b).sum();
    Ok(lagged / energy)
}

/// Magnitude-squared DFT of `eps` (periodogram), returning only the
/// nonnegative-frequency half, then moving-average smoothed across
/// frequency bins (centered window, edges truncated).
pub fn psd(eps: &[f64], smooth_window: usize) -> Result<Vec<f64>> {
    if eps.is_empty() {
        return Err(Error::EmptyInput("psd"));
    }
    if smooth_window == 0 || smooth_window > eps.len() {
        return Err(Error::invalid(
            "smooth_window",
            format!("must be in 1..={}, got {smooth_window}", eps.len()),
        ));
    }
    let raw = periodogram(eps);
    Ok(moving_average(&raw, smooth_window))
}

/// Unsmoothed one-sided periodogram (bins 0..=N/2).
pub fn periodogram(eps: &[f64]) -> Vec<f64> {
    let n = eps.len();
    let mut buf: Vec<Complex<f64>> = eps.iter().map(|&e| Complex::new(e, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..n / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
}

fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let m = values.len();
    let half_lo = (window - 1) / 2;
    let half_hi = window / 2;
    // Prefix sums keep this O(M) for the large windows used on long PSDs.
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    for &v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..m)
        .map(|i| {
            let lo = i.saturating_sub(half_lo);
            let hi = (i + half_hi).min(m - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

/// Run the dither -> quantize -> reconstruct chain on `x` and measure the
/// non-subtractive error against the pre-dither input.
pub fn error_report(
    x: &[f64],
    spec: &DitherSpec,
    cfg: &QuantizerConfig,
    taus: &[usize],
    smooth_window: usize,
) -> Result<ErrorReport> {
    if (spec.delta - cfg.delta).abs() > 1e-12 * cfg.delta.max(1.0) {
        return Err(Error::invalid(
            "delta",
            format!("dither step {} != quantizer step {}", spec.delta, cfg.delta),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let v = spec.sample_with(&mut rng, x.len());
    let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
    let symbols = quantizer::quantize(&y, cfg)?;
    let x_hat = quantizer::reconstruct(&symbols)?;
    let eps = quantizer::error_signal(x, &x_hat)?;

    let mse = mse(&eps)?;
    let mut acf = BTreeMap::new();
    for &tau in taus {
        acf.insert(tau, acf_tau(&eps, tau)?);
    }
    let psd = psd(&eps, smooth_window)?;
    Ok(ErrorReport { mse, acf, psd, smooth_window, n: eps.len() })
}
