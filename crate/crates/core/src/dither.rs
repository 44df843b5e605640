//! Parametric non-subtractive dither: a point mass at zero mixed with a
//! triangular (TPDF) component.
//!
//! The mixture weight `alpha` moves between no dithering (pure atom) and
//! full TPDF dithering. Family 1 keeps the triangular support at the full
//! quantizer step; family 2 shrinks the support with `alpha` itself, so
//! small amounts of dither also stay narrow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::Result;

/// Dither family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DitherFamily {
    /// Full-step triangular support for every mixture weight.
    One,
    /// Support half-width shrinks proportionally to the mixture weight.
    Two,
}

impl DitherFamily {
    pub fn index(self) -> u8 {
        match self {
            DitherFamily::One => 1,
            DitherFamily::Two => 2,
        }
    }

    pub fn from_index(m: u8) -> Result<Self> {
        match m {
            1 => Ok(DitherFamily::One),
            2 => Ok(DitherFamily::Two),
            other => Err(Error::invalid("m", format!("family must be 1 or 2, got {other}"))),
        }
    }
}

/// Fully determines one dither distribution and its sample stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DitherSpec {
    pub family: DitherFamily,
    /// Mixture weight in [0, 1]: probability a sample is drawn from the
    /// triangular component instead of being exactly zero.
    pub alpha: f64,
    /// Quantizer step the dither is sized against.
    pub delta: f64,
    pub seed: u64,
}

impl DitherSpec {
    pub fn new(family: DitherFamily, alpha: f64, delta: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("must be in [0, 1], got {alpha}")));
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
        }
        Ok(Self { family, alpha, delta, seed })
    }

    /// Support half-width of the triangular component:
    /// `a = delta * ((alpha - 1) * m + 2 - alpha)`, which is `delta` for
    /// family 1 and `alpha * delta` for family 2.
    pub fn support_half_width(&self) -> f64 {
        let m = self.family.index() as f64;
        self.delta * ((self.alpha - 1.0) * m + 2.0 - self.alpha)
    }

    /// Exact mixture variance `alpha * a^2 / 6`.
    ///
    /// The second moment of the triangular density on [-a, a] is a^2/6 by
    /// direct integration; the atom contributes nothing. In terms of the
    /// family index this scales as alpha^(2m-1) * delta^2 / 6.
    pub fn variance(&self) -> f64 {
        if self.alpha == 0.0 {
            return 0.0;
        }
        let a = self.support_half_width();
        self.alpha * a * a / 6.0
    }

    /// Continuous density at `v` together with the point mass at zero.
    ///
    /// The atom `1 - alpha` is reported as a distinct mass, never folded
    /// into the density.
    pub fn pdf(&self, v: f64) -> DitherDensity {
        let atom = 1.0 - self.alpha;
        if self.alpha == 0.0 {
            return DitherDensity { density: 0.0, atom_at_zero: atom };
        }
        let a = self.support_half_width();
        let density = if v.abs() <= a && a > 0.0 {
            self.alpha * (a - v.abs()) / (a * a)
        } else {
            0.0
        };
        DitherDensity { density, atom_at_zero: atom }
    }

    /// Draw `n` iid dither samples: zero with probability `1 - alpha`,
    /// otherwise triangular on [-a, a] as the sum of two uniforms.
    pub fn sample(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::invalid("n", "sample count must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(self.sample_with(&mut rng, n))
    }

    /// Same as [`sample`](Self::sample) but drawing from a caller-owned
    /// generator, so one stream can feed a longer pipeline.
    pub fn sample_with(&self, rng: &mut impl Rng, n: usize) -> Vec<f64> {
        let a = self.support_half_width();
        (0..n).map(|_| draw_one(rng, self.alpha, a)).collect()
    }
}

/// Density split into its continuous part and the zero atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DitherDensity {
    pub density: f64,
    pub atom_at_zero: f64,
}

#[inline]
fn draw_one(rng: &mut impl Rng, alpha: f64, a: f64) -> f64 {
    // Bernoulli gate first, then (only if gated) the two triangle draws,
    // so streams for different alphas share a prefix structure.
    if alpha == 0.0 || rng.random::<f64>() >= alpha {
        return 0.0;
    }
    a * (rng.random::<f64>() + rng.random::<f64>() - 1.0)
}
