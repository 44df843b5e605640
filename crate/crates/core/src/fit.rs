//! Trade-off fitting: the performance-model weight `beta*` and the
//! operating-point selection `alpha*`.
//!
//! The performance model is `M = (beta - 1) * MSE + beta * autocov`, where
//! the correlation term is the raw lag autocovariance (ACF_tau scaled back
//! by the MSE). `beta*` is the grid point maximizing the Pearson
//! correlation between the model and the measured performance across the
//! alpha grid; `alpha*` maximizes performance improvement per unit rate
//! change among the amounts that actually improve on no dithering, with a
//! constant-rate shortcut where the rate does not move (1-bit streams).

use crate::dither::DitherFamily;
use crate::error::Error;
use crate::Result;

/// One sweep condition: metrics aggregated over a corpus at fixed
/// (family, alpha, bits).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: DitherFamily,
    pub alpha: f64,
    pub bits: u8,
    /// Files that contributed to the aggregates.
    pub files: usize,
    pub cer_mean: Option<f64>,
    pub cer_sem: Option<f64>,
    pub mse: f64,
    /// Normalized lag-5 autocorrelation of the error.
    pub acf5: f64,
    /// Empirical symbol entropy, bits/symbol.
    pub entropy_bits: f64,
    /// Measured Huffman rate, bits/symbol.
    pub huffman_rate_bits: f64,
}

impl SweepRow {
    /// Raw lag autocovariance used by the performance model.
    pub fn autocovariance(&self) -> f64 {
        self.acf5 * self.mse
    }
}

/// Grid of sweep conditions; each (family, bits) slice covers the same
/// strictly increasing alpha grid.
#[derive(Debug, Clone, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn new(rows: Vec<SweepRow>) -> Result<Self> {
        let table = Self { rows };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        let mut grids: Vec<(DitherFamily, u8, Vec<f64>)> = Vec::new();
        for row in &self.rows {
            if let Some(sem) = row.cer_sem {
                if sem < 0.0 {
                    return Err(Error::invalid("cer_sem", format!("negative ({sem})")));
                }
            }
            match grids.iter_mut().find(|(f, b, _)| *f == row.family && *b == row.bits) {
                Some((_, _, grid)) => grid.push(row.alpha),
                None => grids.push((row.family, row.bits, vec![row.alpha])),
            }
        }
        for (f, b, grid) in &grids {
            for w in grid.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::invalid(
                        "alpha",
                        format!("grid for m={}, b={b} is not strictly increasing", f.index()),
                    ));
                }
            }
        }
        if let Some((_, _, first)) = grids.first() {
            for (f, b, grid) in &grids[1..] {
                if grid != first {
                    return Err(Error::invalid(
                        "alpha",
                        format!("grid for m={}, b={b} differs from the first slice", f.index()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Rows for one (family, bits) slice in grid order.
    pub fn slice(&self, family: DitherFamily, bits: u8) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.family == family && r.bits == bits)
            .collect()
    }

    /// Distinct (family, bits) pairs in row order.
    pub fn conditions(&self) -> Vec<(DitherFamily, u8)> {
        let mut out: Vec<(DitherFamily, u8)> = Vec::new();
        for row in &self.rows {
            if !out.contains(&(row.family, row.bits)) {
                out.push((row.family, row.bits));
            }
        }
        out
    }
}

/// Result of the beta grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFit {
    pub beta_star: f64,
    /// Pearson correlation between the fitted model and the measurements.
    pub pearson_r: f64,
    pub grid_step: f64,
}

/// Result of the alpha* selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaStar {
    pub alpha: f64,
    /// False when no alpha improved on the undithered baseline; `alpha` is
    /// then reported as 0.
    pub improved: bool,
    /// True when the slice was decided purely on performance because the
    /// rate never moved beyond tolerance.
    pub constant_rate: bool,
    /// Improvement-per-rate ratio at the optimum (absent in the
    /// constant-rate and no-improvement regimes).
    pub objective: Option<f64>,
}

/// Default beta grid step; 100 grid points across [0, 1].
pub const DEFAULT_BETA_STEP: f64 = 1.0 / 99.0;

/// Default rate tolerance (bits/symbol) separating the constant-rate
/// regime from genuine rate differences.
pub const DEFAULT_RATE_TOLERANCE: f64 = 1e-3;

/// Performance model `M = (beta - 1) * mse + beta * acf_raw`.
pub fn model_m(mse: f64, acf_raw: f64, beta: f64) -> f64 {
    (beta - 1.0) * mse + beta * acf_raw
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::invalid("n", "need at least 2 points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Standard error of the mean: sample standard deviation (n-1 denominator)
/// over sqrt(n).
pub fn sem(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::invalid("n", "SEM needs at least 2 values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt() / n.sqrt())
}

/// Exhaustive search over `beta in {0, step, 2 step, ..., 1}` for the value
/// maximizing the Pearson correlation between the model and the measured
/// performance across the slice's alpha grid. Ties break toward smaller
/// beta; grid points where the model is constant are not candidates.
pub fn fit_beta(slice: &[&SweepRow], beta_grid_step: f64) -> Result<BetaFit> {
    if slice.len() < 3 {
        return Err(Error::invalid("slice", format!("need >= 3 alpha points, got {}", slice.len())));
    }
    if !(beta_grid_step > 0.0 && beta_grid_step <= 1.0) {
        return Err(Error::invalid("beta_grid_step", format!("got {beta_grid_step}")));
    }
    let perf: Vec<f64> = slice
        .iter()
        .map(|r| r.cer_mean.ok_or(Error::EmptyInput("cer_mean missing from sweep row")))
        .collect::<Result<_>>()?;
    let mse: Vec<f64> = slice.iter().map(|r| r.mse).collect();
    let acf_raw: Vec<f64> = slice.iter().map(|r| r.autocovariance()).collect();

    let steps = (1.0 / beta_grid_step).round() as usize;
    let mut best: Option<(f64, f64)> = None;
    let mut saw_constant_perf = false;
    for k in 0..=steps {
        let beta = k as f64 * beta_grid_step;
        let model: Vec<f64> = mse
            .iter()
            .zip(&acf_raw)
            .map(|(&e, &c)| model_m(e, c, beta))
            .collect();
        match pearson(&model, &perf) {
            Ok(r) => {
                if best.is_none_or(|(_, rb)| r > rb) {
                    best = Some((beta, r));
                }
            }
            Err(Error::ZeroVariance("x")) => continue, // constant model at this beta
            Err(Error::ZeroVariance("y")) => {
                saw_constant_perf = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if saw_constant_perf {
        return Err(Error::ZeroVariance("performance (constant across alpha)"));
    }
    match best {
        Some((beta_star, pearson_r)) => Ok(BetaFit { beta_star, pearson_r, grid_step: beta_grid_step }),
        None => Err(Error::ZeroVariance("model (constant for every beta)")),
    }
}

/// Select `alpha*` for one slice: among amounts that improve on alpha = 0,
/// pick the best performance-per-rate trade-off, or the best performance
/// outright when the rate is constant across the slice.
pub fn optimal_alpha(slice: &[&SweepRow], rate_tolerance: f64) -> Result<AlphaStar> {
    let base = slice
        .iter()
        .find(|r| r.alpha == 0.0)
        .ok_or_else(|| Error::invalid("slice", "grid must include alpha = 0"))?;
    let p0 = base.cer_mean.ok_or(Error::EmptyInput("cer_mean missing from sweep row"))?;
    let r0 = base.huffman_rate_bits;

    let candidates: Vec<&&SweepRow> = slice
        .iter()
        .filter(|r| r.alpha > 0.0 && r.cer_mean.is_some_and(|p| p < p0))
        .collect();
    if candidates.is_empty() {
        return Ok(AlphaStar { alpha: 0.0, improved: false, constant_rate: false, objective: None });
    }

    let max_rate_gap = candidates
        .iter()
        .map(|r| (r0 - r.huffman_rate_bits).abs())
        .fold(0.0f64, f64::max);
    if max_rate_gap < rate_tolerance {
        // Constant-rate regime: performance is the sole factor.
        let best = candidates
            .iter()
            .min_by(|a, b| a.cer_mean.unwrap().total_cmp(&b.cer_mean.unwrap()))
            .unwrap();
        return Ok(AlphaStar {
            alpha: best.alpha,
            improved: true,
            constant_rate: true,
            objective: None,
        });
    }

    // Ratio as printed: (P(0) - P(alpha)) / (R(0) - R(alpha)); amounts whose
    // rate pins the baseline within tolerance are excluded from the ratio.
    let mut best: Option<(f64, f64)> = None;
    for r in &candidates {
        let rate_gap = r0 - r.huffman_rate_bits;
        if rate_gap.abs() < rate_tolerance {
            continue;
        }
        let objective = (p0 - r.cer_mean.unwrap()) / rate_gap;
        if best.is_none_or(|(_, ob)| objective > ob) {
            best = Some((r.alpha, objective));
        }
    }
    match best {
        Some((alpha, objective)) => Ok(AlphaStar {
            alpha,
            improved: true,
            constant_rate: false,
            objective: Some(objective),
        }),
        // Every improving amount sat inside the rate tolerance.
        None => {
            let fallback = candidates
                .iter()
                .min_by(|a, b| a.cer_mean.unwrap().total_cmp(&b.cer_mean.unwrap()))
                .unwrap();
            Ok(AlphaStar {
                alpha: fallback.alpha,
                improved: true,
                constant_rate: true,
                objective: None,
            })
        }
    }
}
