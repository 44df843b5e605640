//! Artifact emission and parsing: sweep CSV/JSON, fit results, and curve
//! CSVs for the figure analogues.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! artifacts are byte-stable for identical inputs and parse back exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pdqc_core::dither::DitherFamily;
use pdqc_core::fit::{AlphaStar, BetaFit, SweepRow, SweepTable};

use crate::sweep::SweepOutcome;
use crate::{HarnessError, Result};

pub const SWEEP_CSV_HEADER: &str =
    "m,alpha,bits,files,cer_mean,cer_sem,mse,acf5,entropy_bits,huffman_rate_bits";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per condition, with CER columns left empty in metrics-only
/// sweeps.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.family.index(),
            r.alpha,
            r.bits,
            r.files,
            opt(r.cer_mean),
            opt(r.cer_sem),
            r.mse,
            r.acf5,
            r.entropy_bits,
            r.huffman_rate_bits,
        ));
    }
    out
}

/// Parse a sweep CSV back into a table (the fit subcommands' input).
pub fn parse_sweep_csv(text: &str) -> Result<SweepTable> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SWEEP_CSV_HEADER => {}
        other => {
            return Err(HarnessError::Table(format!(
                "unexpected header {:?}; want {SWEEP_CSV_HEADER:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 10 {
            return Err(HarnessError::Table(format!(
                "line {}: expected 10 columns, got {}",
                lineno + 2,
                cols.len()
            )));
        }
        let field = |i: usize| -> Result<f64> {
            cols[i]
                .parse::<f64>()
                .map_err(|e| HarnessError::Table(format!("line {}: column {i}: {e}", lineno + 2)))
        };
        let opt_field = |i: usize| -> Result<Option<f64>> {
            if cols[i].is_empty() {
                Ok(None)
            } else {
                field(i).map(Some)
            }
        };
        rows.push(SweepRow {
            family: DitherFamily::from_index(field(0)? as u8)
                .map_err(|e| HarnessError::Table(e.to_string()))?,
            alpha: field(1)?,
            bits: field(2)? as u8,
            files: field(3)? as usize,
            cer_mean: opt_field(4)?,
            cer_sem: opt_field(5)?,
            mse: field(6)?,
            acf5: field(7)?,
            entropy_bits: field(8)?,
            huffman_rate_bits: field(9)?,
        });
    }
    SweepTable::new(rows).map_err(|e| HarnessError::Table(e.to_string()))
}

// ---------------------------------------------------------------------------
// JSON artifacts
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepJson {
    pub seed: u64,
    pub normalization_policy: String,
    pub rows: Vec<SweepRowJson>,
    pub failures: Vec<FailureJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepRowJson {
    pub m: u8,
    pub alpha: f64,
    pub bits: u8,
    pub files: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cer_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cer_sem: Option<f64>,
    pub mse: f64,
    pub acf5: f64,
    pub entropy_bits: f64,
    pub huffman_rate_bits: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FailureJson {
    pub file: String,
    pub m: u8,
    pub alpha: f64,
    pub bits: u8,
    pub reason: String,
}

pub fn sweep_json(outcome: &SweepOutcome, seed: u64) -> String {
    let doc = SweepJson {
        seed,
        normalization_policy: outcome.normalization_policy.to_string(),
        rows: outcome
            .table
            .rows
            .iter()
            .map(|r| SweepRowJson {
                m: r.family.index(),
                alpha: r.alpha,
                bits: r.bits,
                files: r.files,
                cer_mean: r.cer_mean,
                cer_sem: r.cer_sem,
                mse: r.mse,
                acf5: r.acf5,
                entropy_bits: r.entropy_bits,
                huffman_rate_bits: r.huffman_rate_bits,
            })
            .collect(),
        failures: outcome
            .failures
            .iter()
            .map(|f| FailureJson {
                file: f.file.clone(),
                m: f.family.index(),
                alpha: f.alpha,
                bits: f.bits,
                reason: f.reason.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("sweep json serialization")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BetaFitJson {
    pub m: u8,
    pub bits: u8,
    pub beta_star: f64,
    pub pearson_r: f64,
    pub grid_step: f64,
}

/// Fits keyed by (m, bits), in table condition order.
pub fn fits_json(fits: &[(DitherFamily, u8, BetaFit)]) -> String {
    let doc: Vec<BetaFitJson> = fits
        .iter()
        .map(|(m, bits, f)| BetaFitJson {
            m: m.index(),
            bits: *bits,
            beta_star: f.beta_star,
            pearson_r: f.pearson_r,
            grid_step: f.grid_step,
        })
        .collect();
    serde_json::to_string_pretty(&doc).expect("fits json serialization")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AlphaStarJson {
    pub m: u8,
    pub bits: u8,
    pub alpha_star: f64,
    pub improved: bool,
    pub constant_rate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

pub fn alpha_star_json(stars: &[(DitherFamily, u8, AlphaStar)]) -> String {
    let doc: Vec<AlphaStarJson> = stars
        .iter()
        .map(|(m, bits, s)| AlphaStarJson {
            m: m.index(),
            bits: *bits,
            alpha_star: s.alpha,
            improved: s.improved,
            constant_rate: s.constant_rate,
            objective: s.objective,
        })
        .collect();
    serde_json::to_string_pretty(&doc).expect("alpha-star json serialization")
}

/// Scaled-model curve data: `M(., beta*)` mapped affinely into the range
/// of the measured performance, one row per alpha.
pub fn scaled_model_csv(slice: &[&SweepRow], fit: &BetaFit) -> String {
    let mut out = String::from("alpha,performance,model_scaled\n");
    let model: Vec<f64> = slice
        .iter()
        .map(|r| pdqc_core::fit::model_m(r.mse, r.autocovariance(), fit.beta_star))
        .collect();
    let perf: Vec<f64> = slice.iter().map(|r| r.cer_mean.unwrap_or(f64::NAN)).collect();
    let (mmin, mmax) = model.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let (pmin, pmax) = perf
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    for ((r, m), p) in slice.iter().zip(&model).zip(&perf) {
        let scaled = if mmax > mmin && pmax > pmin {
            (m - mmin) / (mmax - mmin) * (pmax - pmin) + pmin
        } else {
            *m
        };
        out.push_str(&format!("{},{},{}\n", r.alpha, p, scaled));
    }
    out
}

/// Analytic entropy, expected Huffman rate, and Gaussian-bound curves vs
/// alpha.
pub fn entropy_curve_csv(rows: &[EntropyCurveRow]) -> String {
    let mut out =
        String::from("m,alpha,bits,analytic_entropy_bits,huffman_expected_bits,gaussian_bound_bits\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.m,
            r.alpha,
            r.bits,
            r.analytic_entropy_bits,
            r.huffman_expected_bits,
            opt(r.gaussian_bound_bits)
        ));
    }
    out
}

/// One analytic curve point.
#[derive(Debug, Clone, Copy)]
pub struct EntropyCurveRow {
    pub m: u8,
    pub alpha: f64,
    pub bits: u8,
    pub analytic_entropy_bits: f64,
    pub huffman_expected_bits: f64,
    pub gaussian_bound_bits: Option<f64>,
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(HarnessError::io(path.to_string_lossy().into_owned()))
}
