//! Symbol statistics and coding rate: analytic and empirical bin
//! probabilities, Shannon entropy, the Gaussian maximum-entropy bound, and
//! Huffman coding.
//!
//! The analytic path assumes a zero-mean Laplacian source. The quantizer
//! input is `Y = X + V`; each bin probability is the atom contribution
//! (closed-form Laplace CDF) plus the triangular component integrated by
//! adaptive quadrature. Saturated tails fold into the outermost bins, so
//! analytic and empirical distributions describe the same clipped
//! quantizer.

pub mod huffman;

pub use huffman::HuffmanCode;

use crate::dither::DitherSpec;
use crate::error::Error;
use crate::quantizer::{QuantizerConfig, SymbolBuffer};
use crate::Result;

/// Absolute tolerance for the convolution quadrature.
const QUAD_TOL: f64 = 1e-9;

/// Where a symbol distribution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionSource {
    Analytic,
    Empirical,
}

/// Probabilities per quantizer bin, lowest bin index first.
#[derive(Debug, Clone)]
pub struct SymbolDistribution {
    pub probs: Vec<f64>,
    pub source: DistributionSource,
}

impl SymbolDistribution {
    pub fn new(probs: Vec<f64>, source: DistributionSource) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput("symbol distribution"));
        }
        if probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::invalid("probs", "probabilities must be finite and >= 0"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("probs", format!("sum {total} != 1 within 1e-9")));
        }
        Ok(Self { probs, source })
    }
}

/// Rate summary for one symbol stream or distribution.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub shannon_entropy: f64,
    pub huffman_avg_length: f64,
    /// None when the bound's log argument is not positive (coarse steps
    /// against a narrow source make it vacuous).
    pub gaussian_bound: Option<f64>,
    pub empirical: bool,
}

/// Rate summary for one distribution: its entropy, the expected length of
/// the Huffman code built for it, and the Gaussian bound at the given
/// source scale.
pub fn rate_report(
    dist: &SymbolDistribution,
    spec: &DitherSpec,
    cfg: &QuantizerConfig,
    laplace_c: f64,
) -> Result<RateReport> {
    let shannon_entropy = shannon_entropy(dist);
    let huffman_avg_length = HuffmanCode::build(dist)?.average_length(&dist.probs);
    let gaussian_bound = gaussian_entropy_bound(laplace_c, spec, cfg).ok();
    Ok(RateReport {
        shannon_entropy,
        huffman_avg_length,
        gaussian_bound,
        empirical: dist.source == DistributionSource::Empirical,
    })
}

// ---------------------------------------------------------------------------
// Bin probabilities
// ---------------------------------------------------------------------------

/// Zero-mean Laplace CDF.
fn laplace_cdf(t: f64, c: f64) -> f64 {
    if t < 0.0 {
        0.5 * (t / c).exp()
    } else {
        1.0 - 0.5 * (-t / c).exp()
    }
}

fn laplace_interval(lo: f64, hi: f64, c: f64) -> f64 {
    let f_hi = if hi.is_infinite() { 1.0 } else { laplace_cdf(hi, c) };
    let f_lo = if lo.is_infinite() { 0.0 } else { laplace_cdf(lo, c) };
    f_hi - f_lo
}

/// P(T_j <= Y < T_{j+1}) for Y = X + V with X ~ Laplace(0, c) and V the
/// parametric dither; the outermost bins absorb the saturated tails.
pub fn analytic_bin_probs(
    laplace_c: f64,
    spec: &DitherSpec,
    cfg: &QuantizerConfig,
) -> Result<SymbolDistribution> {
    if !laplace_c.is_finite() || laplace_c <= 0.0 {
        return Err(Error::invalid("laplace_c", format!("must be > 0, got {laplace_c}")));
    }
    if (spec.delta - cfg.delta).abs() > 1e-12 * cfg.delta.max(1.0) {
        return Err(Error::invalid(
            "delta",
            format!("dither step {} != quantizer step {}", spec.delta, cfg.delta),
        ));
    }
    let alpha = spec.alpha;
    let a = spec.support_half_width();
    let mut probs = Vec::with_capacity(cfg.levels());
    for j in cfg.min_index()..=cfg.max_index() {
        let lo = if j == cfg.min_index() { f64::NEG_INFINITY } else { cfg.threshold(j) };
        let hi = if j == cfg.max_index() { f64::INFINITY } else { cfg.threshold(j + 1) };

        let atom_part = (1.0 - alpha) * laplace_interval(lo, hi, laplace_c);
        let tri_part = if alpha > 0.0 && a > 0.0 {
            let f = |v: f64| {
                (a - v.abs()) / (a * a) * laplace_interval(lo - v, hi - v, laplace_c)
            };
            alpha * integrate_piecewise(&f, a, lo, hi)?
        } else {
            alpha * laplace_interval(lo, hi, laplace_c)
        };
        probs.push(atom_part + tri_part);
    }
    // Quadrature leaves a ~1e-12 residue; renormalize so the invariant
    // sum(p) = 1 holds exactly enough for downstream checks.
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::QuadratureTolerance { requested: QUAD_TOL, achieved: (total - 1.0).abs() });
    }
    for p in &mut probs {
        *p /= total;
    }
    SymbolDistribution::new(probs, DistributionSource::Analytic)
}

/// Integrate `f` over [-a, a] with panels split at the integrand's kinks
/// (v = 0 from the triangle, v = lo and v = hi from the Laplace CDF).
fn integrate_piecewise(f: &impl Fn(f64) -> f64, a: f64, lo: f64, hi: f64) -> Result<f64> {
    let mut pts = vec![-a, a];
    for p in [0.0, lo, hi] {
        if p.is_finite() && p > -a && p < a {
            pts.push(p);
        }
    }
    pts.sort_by(|x, y| x.total_cmp(y));
    let mut total = 0.0;
    for pair in pts.windows(2) {
        let tol = QUAD_TOL * (pair[1] - pair[0]) / (2.0 * a);
        total += adaptive_simpson(f, pair[0], pair[1], tol)?;
    }
    Ok(total)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    fn simpson(lo: f64, hi: f64, flo: f64, fmid: f64, fhi: f64) -> f64 {
        (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        flo: f64,
        fmid: f64,
        fhi: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, f64> {
        let mid = 0.5 * (lo + hi);
        let lmid = 0.5 * (lo + mid);
        let rmid = 0.5 * (mid + hi);
        let flmid = f(lmid);
        let frmid = f(rmid);
        let left = simpson(lo, mid, flo, flmid, fmid);
        let right = simpson(mid, hi, fmid, frmid, fhi);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(err.abs() / 15.0);
        }
        let l = recurse(f, lo, mid, flo, flmid, fmid, left, tol / 2.0, depth - 1);
        let r = recurse(f, mid, hi, fmid, frmid, fhi, right, tol / 2.0, depth - 1);
        match (l, r) {
            (Ok(a), Ok(b)) => Ok(a + b),
            (Err(e), Ok(_)) | (Ok(_), Err(e)) => Err(e),
            (Err(e1), Err(e2)) => Err(e1 + e2),
        }
    }

    if hi <= lo {
        return Ok(0.0);
    }
    let mid = 0.5 * (lo + hi);
    let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
    let whole = simpson(lo, hi, flo, fmid, fhi);
    recurse(f, lo, hi, flo, fmid, fhi, whole, tol, 48)
        .map_err(|achieved| Error::QuadratureTolerance { requested: tol, achieved })
}

/// Relative bin frequencies of a symbol stream.
pub fn empirical_bin_probs(sym: &SymbolBuffer) -> Result<SymbolDistribution> {
    if sym.is_empty() {
        return Err(Error::EmptyInput("symbol buffer"));
    }
    let cfg = &sym.config;
    let mut counts = vec![0u64; cfg.levels()];
    for &j in &sym.indices {
        if j < cfg.min_index() || j > cfg.max_index() {
            return Err(Error::SymbolOutOfRange { index: j, bits: cfg.bits });
        }
        counts[SymbolBuffer::dense_offset(cfg, j)] += 1;
    }
    let n = sym.len() as f64;
    let probs = counts.iter().map(|&c| c as f64 / n).collect();
    SymbolDistribution::new(probs, DistributionSource::Empirical)
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

/// Shannon entropy in bits/symbol, with 0 * log 0 = 0.
pub fn shannon_entropy(dist: &SymbolDistribution) -> f64 {
    dist.probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Gaussian maximum-entropy bound with the Sheppard term as printed:
/// `0.5 * log2(2*pi*e * (2c^2 + sigma_m^2 - delta^2/12))`.
pub fn gaussian_entropy_bound(
    laplace_c: f64,
    spec: &DitherSpec,
    cfg: &QuantizerConfig,
) -> Result<f64> {
    if !laplace_c.is_finite() || laplace_c <= 0.0 {
        return Err(Error::invalid("laplace_c", format!("must be > 0, got {laplace_c}")));
    }
    let argument = 2.0 * laplace_c * laplace_c + spec.variance() - cfg.delta * cfg.delta / 12.0;
    if argument <= 0.0 {
        return Err(Error::NonPositiveLogArgument { argument });
    }
    Ok(0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * argument).log2())
}
