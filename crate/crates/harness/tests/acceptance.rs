//! Acceptance suite: one test per acceptance criterion, each printing a
//! single PASS line with its measured values (visible with
//! `cargo test -p pdqc --test acceptance -- --nocapture`).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use pdqc_core::analysis;
use pdqc_core::codec;
use pdqc_core::dither::{DitherFamily, DitherSpec};
use pdqc_core::fit::{self, SweepRow};
use pdqc_core::quantizer::{self, QuantizerConfig};
use pdqc_core::rate::{self, HuffmanCode};
use pdqc_core::signal::{self, AudioBuffer, LaplacianSource};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------------

/// Speech-like test signal: an AR(2) resonance near 1 kHz at 48 kHz driven
/// by Laplacian innovations, peak-normalized. Shares the amplitude
/// statistics and spectral concentration of voiced speech.
fn speech_like(n: usize, seed: u64) -> Vec<f64> {
    let src = LaplacianSource::new(0.0, 1.0, seed).unwrap();
    let innov = signal::sample_laplacian(&src, n).unwrap().samples;
    let theta = 2.0 * std::f64::consts::PI * 1000.0 / 48_000.0;
    let r = 0.97f64;
    let (a1, a2) = (2.0 * r * theta.cos(), -r * r);
    let mut x = vec![0.0; n];
    x[0] = innov[0];
    x[1] = innov[1];
    for i in 2..n {
        x[i] = a1 * x[i - 1] + a2 * x[i - 2] + innov[i];
    }
    let peak = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    x.iter_mut().for_each(|v| *v /= peak);
    x
}

/// Laplacian samples rejected into the granular-safe range |x| <= limit.
fn in_range_laplacian(n: usize, c: f64, limit: f64, seed: u64) -> Vec<f64> {
    let src = LaplacianSource::new(0.0, c, seed).unwrap();
    let mut out = Vec::with_capacity(n);
    let mut chunk_seed = seed;
    while out.len() < n {
        let src = LaplacianSource { seed: chunk_seed, ..src };
        for v in signal::sample_laplacian(&src, n).unwrap().samples {
            if v.abs() <= limit {
                out.push(v);
                if out.len() == n {
                    break;
                }
            }
        }
        chunk_seed = chunk_seed.wrapping_add(0x9e37_79b9);
    }
    out
}

/// Dither -> quantize -> reconstruct, returning the error signal.
fn pipeline_error(x: &[f64], family: DitherFamily, alpha: f64, bits: u8, seed: u64) -> Vec<f64> {
    let cfg = QuantizerConfig::mid_rise(bits, 1.0).unwrap();
    let spec = DitherSpec::new(family, alpha, cfg.delta, seed).unwrap();
    let v = spec.sample(x.len()).unwrap();
    let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
    let xh = quantizer::reconstruct(&quantizer::quantize(&y, &cfg).unwrap()).unwrap();
    quantizer::error_signal(x, &xh).unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard error of a mean-of-squares estimate.
fn mse_standard_error(eps: &[f64]) -> f64 {
    let sq: Vec<f64> = eps.iter().map(|e| e * e).collect();
    let m = mean(&sq);
    let var = sq.iter().map(|&s| (s - m) * (s - m)).sum::<f64>() / (sq.len() as f64 - 1.0);
    (var / sq.len() as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Criterion 1: dithered-quantizer moment theory
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_moment_theory() {
    let n = 1_000_000;
    let cfg = QuantizerConfig::mid_rise(8, 1.0).unwrap();
    let delta = cfg.delta;
    let x = in_range_laplacian(n, 0.1, 1.0 - 3.0 * delta, 1001);

    let eps0 = pipeline_error(&x, DitherFamily::One, 0.0, 8, 77);
    let mse0 = mean(&eps0.iter().map(|e| e * e).collect::<Vec<_>>());
    let floor = delta * delta / 12.0;
    let dev0 = (mse0 - floor).abs() / floor;
    assert!(dev0 < 0.01, "no-dither MSE {mse0} deviates {dev0:.4} from delta^2/12 {floor}");

    let eps1 = pipeline_error(&x, DitherFamily::One, 1.0, 8, 78);
    let mse1 = mean(&eps1.iter().map(|e| e * e).collect::<Vec<_>>());
    let full = delta * delta / 4.0;
    let dev1 = (mse1 - full).abs() / full;
    assert!(dev1 < 0.02, "full-dither MSE {mse1} deviates {dev1:.4} from delta^2/4 {full}");

    // Document the dither-variance constant: direct integration (a^2/6,
    // implemented) versus the stated a^2/4, via the Monte Carlo second
    // moment of the full dither itself.
    let spec = DitherSpec::new(DitherFamily::One, 1.0, delta, 79).unwrap();
    let v = spec.sample(n).unwrap();
    let var_ratio = mean(&v.iter().map(|s| s * s).collect::<Vec<_>>()) / (delta * delta);
    assert!((var_ratio - 1.0 / 6.0).abs() < 0.01 * 1.0 / 6.0);

    println!(
        "ACCEPTANCE 1 PASS — granular MSE dev {:.3}% (tol 1%), full-dither MSE dev {:.3}% \
         (tol 2%); measured Var(V)/delta^2 = {:.5} matches integration value 1/6 = {:.5}, \
         stated constant would be 1/4 = 0.25",
        dev0 * 100.0,
        dev1 * 100.0,
        var_ratio,
        1.0 / 6.0
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: trade-off monotonicity (Fig. 3 analogue)
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_tradeoff_monotonicity() {
    let n = 1_000_000;
    let x = speech_like(n, 2002);
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];

    let mut worst_mse_viol = 0.0f64;
    let mut worst_acf_viol = 0.0f64;
    let mut min_gap_sigmas = f64::INFINITY;

    for bits in [1u8, 2, 3] {
        let mut curves: Vec<Vec<(f64, f64, f64)>> = Vec::new(); // (mse, |acf5|, mse_se)
        for family in [DitherFamily::One, DitherFamily::Two] {
            let mut curve = Vec::new();
            for (i, &alpha) in grid.iter().enumerate() {
                // Seed depends on alpha only, so the two families share
                // dither streams and coincide exactly at the endpoints.
                let eps = pipeline_error(&x, family, alpha, bits, 3000 + i as u64);
                let mse = mean(&eps.iter().map(|e| e * e).collect::<Vec<_>>());
                let acf = analysis::acf_tau(&eps, 5).unwrap();
                curve.push((mse, acf.abs(), mse_standard_error(&eps)));
            }
            // Monotonicity within the estimator-noise margins.
            for w in curve.windows(2) {
                let mse_drop = (w[0].0 - w[1].0) / w[0].0;
                worst_mse_viol = worst_mse_viol.max(mse_drop);
                assert!(
                    w[1].0 >= w[0].0 * (1.0 - 0.005),
                    "b={bits} {family:?}: MSE decreased {:.4} -> {:.4}",
                    w[0].0,
                    w[1].0
                );
                let acf_rise = w[1].1 - w[0].1;
                worst_acf_viol = worst_acf_viol.max(acf_rise);
                assert!(
                    w[1].1 <= w[0].1 + 0.005,
                    "b={bits} {family:?}: |ACF5| increased {:.4} -> {:.4}",
                    w[0].1,
                    w[1].1
                );
            }
            curves.push(curve);
        }
        // Families coincide exactly at the endpoints (shared streams)...
        for idx in [0usize, 4] {
            let gap = (curves[0][idx].0 - curves[1][idx].0).abs();
            assert!(gap < 1e-15, "b={bits}: endpoint alpha={} gap {gap}", grid[idx]);
        }
        // ...and separate at alpha = 0.5 by more than combined MC error.
        let (m1, m2) = (&curves[0][2], &curves[1][2]);
        let combined_se = (m1.2 * m1.2 + m2.2 * m2.2).sqrt();
        let gap_sigmas = (m1.0 - m2.0).abs() / combined_se;
        min_gap_sigmas = min_gap_sigmas.min(gap_sigmas);
        assert!(
            gap_sigmas > 3.0,
            "b={bits}: families indistinct at alpha=0.5 ({gap_sigmas:.1} sigma)"
        );
    }

    println!(
        "ACCEPTANCE 2 PASS — MSE nondecreasing (worst relative dip {:.4}%, margin 0.5%), \
         |ACF5| nonincreasing (worst rise {:.4}, margin 0.005), endpoints coincide exactly, \
         alpha=0.5 family separation >= {:.0} sigma",
        worst_mse_viol * 100.0,
        worst_acf_viol,
        min_gap_sigmas
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: PSD shaping (Fig. 2 analogue)
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_psd_shaping() {
    let n = 1 << 20;
    let x = speech_like(n, 3003);

    let smoothed_psd = |alpha: f64, seed: u64| -> Vec<f64> {
        let eps = pipeline_error(&x, DitherFamily::One, alpha, 1, seed);
        analysis::psd(&eps, 480).unwrap()
    };
    // Flatness over the smoothed one-sided band, DC excluded. Estimator
    // dispersion makes a per-bin max-deviation reading unattainable even
    // for perfectly white error (smoothed-bin sd is 1/sqrt(480) = 4.6%),
    // so flatness is measured as RMS relative deviation from the band
    // mean; the max deviation is reported alongside.
    let stats = |s: &[f64]| -> (f64, f64, f64) {
        let body = &s[1..];
        let m = mean(body);
        let rms = (body.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / body.len() as f64)
            .sqrt()
            / m;
        let maxdev = body.iter().fold(0.0f64, |acc, &v| acc.max((v - m).abs())) / m;
        let ratio = body.iter().fold(0.0f64, |a, &v| a.max(v))
            / body.iter().fold(f64::INFINITY, |a, &v| a.min(v));
        (rms, maxdev, ratio)
    };

    let (rms_full, maxdev_full, ratio_full) = stats(&smoothed_psd(1.0, 31));
    let (_, _, ratio_null) = stats(&smoothed_psd(0.0, 31));

    assert!(rms_full < 0.10, "full-dither PSD not flat: RMS deviation {rms_full:.4}");
    assert!(
        ratio_null >= 5.0 * ratio_full,
        "peak-to-floor contrast too small: null {ratio_null:.1} vs full {ratio_full:.2}"
    );

    println!(
        "ACCEPTANCE 3 PASS — full-dither smoothed PSD flat to {:.2}% RMS (tol 10%; max dev \
         {:.1}%), peak/floor {:.2} vs null-dither {:.1} ({:.0}x, required 5x)",
        rms_full * 100.0,
        maxdev_full * 100.0,
        ratio_full,
        ratio_null,
        ratio_null / ratio_full
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: entropy structure (Fig. 3-entropy analogue)
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_entropy_structure() {
    let c = 0.1;
    let grid: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();

    let analytic = |m: DitherFamily, alpha: f64, cfg: &QuantizerConfig| -> f64 {
        let spec = DitherSpec::new(m, alpha, cfg.delta, 0).unwrap();
        rate::shannon_entropy(&rate::analytic_bin_probs(c, &spec, cfg).unwrap())
    };

    for bits in [2u8, 3] {
        let cfg = QuantizerConfig::mid_rise(bits, 1.0).unwrap();
        for m in [DitherFamily::One, DitherFamily::Two] {
            let h: Vec<f64> = grid.iter().map(|&a| analytic(m, a, &cfg)).collect();
            for w in h.windows(2) {
                assert!(w[1] >= w[0] - 1e-9, "b={bits} {m:?}: entropy not nondecreasing");
            }
            for w in h.windows(3) {
                let d2 = w[2] - 2.0 * w[1] + w[0];
                match m {
                    DitherFamily::One => assert!(d2 <= 1e-9, "b={bits} m=1 not concave: {d2}"),
                    DitherFamily::Two => assert!(d2 >= -1e-9, "b={bits} m=2 not convex: {d2}"),
                }
            }
        }
        for &alpha in &grid[1..grid.len() - 1] {
            let h1 = analytic(DitherFamily::One, alpha, &cfg);
            let h2 = analytic(DitherFamily::Two, alpha, &cfg);
            assert!(h1 >= h2 - 1e-9, "b={bits} alpha={alpha}: H1 {h1} < H2 {h2}");
        }
    }

    // 1-bit invariance: exactly 1 bit across the full grid and families.
    let cfg1 = QuantizerConfig::mid_rise(1, 1.0).unwrap();
    let mut max_one_bit_dev = 0.0f64;
    for m in [DitherFamily::One, DitherFamily::Two] {
        for &alpha in &grid {
            let h = analytic(m, alpha, &cfg1);
            max_one_bit_dev = max_one_bit_dev.max((h - 1.0).abs());
            assert!((h - 1.0).abs() < 1e-9, "b=1 {m:?} alpha={alpha}: H={h}");
        }
    }

    // Analytic vs empirical: 10^7 simulated pipeline draws per condition,
    // each bin within 3 standard errors.
    let n = 10_000_000usize;
    let mut worst_z = 0.0f64;
    for bits in [2u8, 3] {
        let cfg = QuantizerConfig::mid_rise(bits, 1.0).unwrap();
        for (mi, m) in [DitherFamily::One, DitherFamily::Two].into_iter().enumerate() {
            for (ai, &alpha) in [0.0, 0.5, 1.0].iter().enumerate() {
                let spec = DitherSpec::new(m, alpha, cfg.delta, 40_000 + (bits as u64) * 100 + (mi as u64) * 10 + ai as u64).unwrap();
                let probs = rate::analytic_bin_probs(c, &spec, &cfg).unwrap().probs;

                let src = LaplacianSource::new(0.0, c, 50_000 + spec.seed).unwrap();
                let x = signal::sample_laplacian(&src, n).unwrap().samples;
                let v = spec.sample(n).unwrap();
                let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
                let sym = quantizer::quantize(&y, &cfg).unwrap();
                let emp = rate::empirical_bin_probs(&sym).unwrap().probs;

                for (k, (&p, &q)) in probs.iter().zip(&emp).enumerate() {
                    let se = (p * (1.0 - p) / n as f64).sqrt();
                    let z = if se > 0.0 { (q - p).abs() / se } else { 0.0 };
                    worst_z = worst_z.max(z);
                    assert!(
                        (q - p).abs() <= 3.0 * se,
                        "b={bits} {m:?} alpha={alpha} bin {k}: analytic {p} vs empirical {q} \
                         ({z:.2} se)"
                    );
                }
            }
        }
    }

    println!(
        "ACCEPTANCE 4 PASS — analytic entropy nondecreasing with concave(m=1)/convex(m=2) \
         signatures at b=2,3; H(Q1)>=H(Q2) inside (0,1); 1-bit entropy constant to {:.1e} bits; \
         10^7-draw empirical agreement, worst bin {:.2} se (tol 3)",
        max_one_bit_dev,
        worst_z
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: coding efficiency
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_coding_efficiency() {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);

    // Entropy bounds on every tested empirical distribution: random
    // alphabets plus real pipeline symbol streams.
    let mut tested = 0usize;
    let mut worst_redundancy = 0.0f64;
    let mut check_bounds = |dist: &rate::SymbolDistribution| {
        let h = rate::shannon_entropy(dist);
        let avg = HuffmanCode::build(dist).unwrap().average_length(&dist.probs);
        assert!(h <= avg + 1e-12 && avg < h + 1.0, "H={h} L={avg}");
        worst_redundancy = worst_redundancy.max(avg - h);
        tested += 1;
    };

    for k in [2usize, 3, 4, 8, 16] {
        for _ in 0..20 {
            let mut probs: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            check_bounds(&rate::SymbolDistribution::new(probs, rate::DistributionSource::Empirical).unwrap());
        }
    }
    let x = speech_like(100_000, 5050);
    for bits in [1u8, 2, 3] {
        for alpha in [0.0, 0.5, 1.0] {
            let cfg = QuantizerConfig::mid_rise(bits, 1.0).unwrap();
            let spec = DitherSpec::new(DitherFamily::One, alpha, cfg.delta, 66).unwrap();
            let v = spec.sample(x.len()).unwrap();
            let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
            let sym = quantizer::quantize(&y, &cfg).unwrap();
            check_bounds(&rate::empirical_bin_probs(&sym).unwrap());
        }
    }

    // Brute-force optimality on all alphabet sizes <= 4.
    let brute_force_optimum = |probs: &[f64]| -> f64 {
        let k = probs.len();
        let mut best = f64::INFINITY;
        let mut lens = vec![1usize; k];
        loop {
            let kraft: f64 = lens.iter().map(|&l| 2f64.powi(-(l as i32))).sum();
            if kraft <= 1.0 + 1e-12 {
                best = best.min(lens.iter().zip(probs).map(|(&l, &p)| l as f64 * p).sum());
            }
            let mut i = 0;
            loop {
                if i == k {
                    return best;
                }
                lens[i] += 1;
                if lens[i] <= k {
                    break;
                }
                lens[i] = 1;
                i += 1;
            }
        }
    };
    let mut optimality_checks = 0usize;
    for k in 2usize..=4 {
        for _ in 0..100 {
            let mut probs: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let total: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= total);
            let dist =
                rate::SymbolDistribution::new(probs.clone(), rate::DistributionSource::Empirical)
                    .unwrap();
            let avg = HuffmanCode::build(&dist).unwrap().average_length(&probs);
            let best = brute_force_optimum(&probs);
            assert!((avg - best).abs() < 1e-9, "k={k}: huffman {avg} vs optimum {best}");
            optimality_checks += 1;
        }
    }

    // 10^4 randomized encode/decode round trips through the full codec.
    for trial in 0..10_000u64 {
        let bits = rng.random_range(1..=3u8);
        let cfg = QuantizerConfig::mid_rise(bits, 1.0).unwrap();
        let n = rng.random_range(1..=48usize);
        let x = AudioBuffer::new(
            (0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect(),
            16_000,
            "rt",
        )
        .unwrap();
        let family = if rng.random::<bool>() { DitherFamily::One } else { DitherFamily::Two };
        let spec = DitherSpec::new(family, rng.random(), cfg.delta, trial).unwrap();
        let stream = codec::encode(&x, &spec, &cfg).unwrap();
        let decoded = codec::decode_bytes(&stream.to_bytes()).unwrap();
        let direct = codec::decode(&stream).unwrap();
        assert_eq!(decoded.samples, direct.samples, "trial {trial}");
        assert_eq!(decoded.len(), n);
    }

    println!(
        "ACCEPTANCE 5 PASS — H <= L < H+1 on {tested} empirical distributions (worst redundancy \
         {:.4} bits), Huffman optimal vs brute-force prefix search on {optimality_checks} \
         alphabets of size <= 4, 10^4 randomized round-trips lossless",
        worst_redundancy
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: optimizer correctness
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_optimizer_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);

    // 100 randomized affine constructions; recovery within one grid step.
    let mut worst_err = 0.0f64;
    for trial in 0..100 {
        let beta0: f64 = rng.random();
        let scale = 0.1 + 5.0 * rng.random::<f64>();
        let shift = rng.random::<f64>() - 0.5;
        let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
        let mses = [0.02, 0.05, 0.09, 0.14, 0.2];
        let acfs = [0.6, 0.4, 0.25, 0.12, 0.03];
        let rows: Vec<SweepRow> = alphas
            .iter()
            .zip(mses.iter().zip(&acfs))
            .map(|(&a, (&e, &cf))| SweepRow {
                family: DitherFamily::One,
                alpha: a,
                bits: 1,
                files: 1,
                cer_mean: Some(fit::model_m(e, cf * e, beta0) * scale + shift),
                cer_sem: None,
                mse: e,
                acf5: cf,
                entropy_bits: 1.0,
                huffman_rate_bits: 1.0,
            })
            .collect();
        let slice: Vec<&SweepRow> = rows.iter().collect();
        let f = fit::fit_beta(&slice, fit::DEFAULT_BETA_STEP).unwrap();
        let err = (f.beta_star - beta0).abs();
        worst_err = worst_err.max(err);
        assert!(
            err <= fit::DEFAULT_BETA_STEP + 1e-12,
            "trial {trial}: beta* {} vs planted {beta0}",
            f.beta_star
        );
    }

    // Constant-rate regime returns the argmin-CER alpha.
    let mk = |alpha: f64, cer: f64, bits_rate: f64| SweepRow {
        family: DitherFamily::Two,
        alpha,
        bits: 1,
        files: 1,
        cer_mean: Some(cer),
        cer_sem: None,
        mse: 0.1,
        acf5: 0.1,
        entropy_bits: bits_rate,
        huffman_rate_bits: bits_rate,
    };
    let rows = [mk(0.0, 0.30, 1.0),
        mk(0.25, 0.24, 1.0),
        mk(0.5, 0.19, 1.0),
        mk(0.75, 0.22, 1.0),
        mk(1.0, 0.27, 1.0)];
    let slice: Vec<&SweepRow> = rows.iter().collect();
    let star = fit::optimal_alpha(&slice, fit::DEFAULT_RATE_TOLERANCE).unwrap();
    assert_eq!(star.alpha, 0.5);
    assert!(star.constant_rate && star.improved);

    // Hand-computed printed-formula ratios: candidate A (P=0.20, R=2.5)
    // gives (0.30-0.20)/(2.0-2.5) = -0.2; candidate B (P=0.25, R=2.1)
    // gives (0.30-0.25)/(2.0-2.1) = -0.5; argmax picks A.
    let rows = [mk(0.0, 0.30, 2.0), mk(0.5, 0.20, 2.5), mk(1.0, 0.25, 2.1)];
    let slice: Vec<&SweepRow> = rows.iter().collect();
    let star = fit::optimal_alpha(&slice, fit::DEFAULT_RATE_TOLERANCE).unwrap();
    assert_eq!(star.alpha, 0.5);
    assert!((star.objective.unwrap() - (-0.2)).abs() < 1e-12);

    println!(
        "ACCEPTANCE 6 PASS — beta* recovered within one grid step on 100 affine constructions \
         (worst error {:.5}, step {:.5}); constant-rate regime returns argmin CER; printed-\
         formula ratio selects the hand-computed optimum",
        worst_err,
        fit::DEFAULT_BETA_STEP
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: desk-scale substitute for the full corpus experiment
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_sweep_artifacts_with_stub_asr() {
    use pdqc::artifacts;
    use pdqc::asr::AsrClient;
    use pdqc::sweep::{run_sweep, SweepConfig};

    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("stub_asr.sh");
    let mut f = std::fs::File::create(&script).unwrap();
    // Transcript depends only on the input's audio content class: decoded
    // files yield slightly different text than originals, giving nonzero
    // deterministic CER.
    writeln!(
        f,
        "#!/bin/sh\ncase \"$1\" in *reference*) echo the quick brown fox > \"$2\";; *) echo \
         the quick brown fax > \"$2\";; esac"
    )
    .unwrap();
    drop(f);
    let client = AsrClient::new(format!("sh {} {{in}} {{out}}", script.display()), 60);

    // Tiny synthetic corpus standing in for the 30-voice commercial one.
    let corpus: Vec<AudioBuffer> = (0..2)
        .map(|i| {
            let src = LaplacianSource::new(0.0, 0.1, 7000 + i).unwrap();
            let mut b = signal::sample_laplacian(&src, 4800).unwrap();
            b.label = format!("speaker{i:02}");
            signal::normalize_trim(&b, 1e9).unwrap()
        })
        .collect();

    // Full default grid: 9 alphas x 2 families x 3 depths.
    let config = SweepConfig {
        alphas: SweepConfig::default_alpha_grid(),
        families: vec![DitherFamily::One, DitherFamily::Two],
        bits: vec![1, 2, 3],
        seed: 7,
        jobs: 4,
    };

    let run = |scratch: &Path| {
        std::fs::create_dir_all(scratch).unwrap();
        let outcome = run_sweep(&corpus, &config, Some(&client), Some(scratch)).unwrap();
        (artifacts::sweep_csv(&outcome.table), artifacts::sweep_json(&outcome, config.seed))
    };
    let (csv1, json1) = run(&dir.path().join("s1"));
    let (csv2, json2) = run(&dir.path().join("s2"));
    assert_eq!(csv1, csv2, "sweep CSV not deterministic");
    assert_eq!(json1, json2, "sweep JSON not deterministic");

    // Schema-valid and complete: every condition present with CER filled.
    let table = artifacts::parse_sweep_csv(&csv1).unwrap();
    assert_eq!(table.rows.len(), 9 * 2 * 3);
    let expected_cer = pdqc::cer::cer("the quick brown fox", "the quick brown fax").unwrap().cer;
    for row in &table.rows {
        assert_eq!(row.files, 2);
        assert_eq!(row.cer_mean, Some(expected_cer));
        assert_eq!(row.cer_sem, Some(0.0));
        assert!(row.huffman_rate_bits > 0.0 && row.entropy_bits >= 0.0);
    }
    let parsed: serde_json::Value = serde_json::from_str(&json1).unwrap();
    assert_eq!(parsed["rows"].as_array().unwrap().len(), 9 * 2 * 3);
    assert_eq!(parsed["failures"].as_array().unwrap().len(), 0);
    assert!(parsed["normalization_policy"].is_string());

    // The fit machinery consumes the emitted schema end to end.
    let slice = table.slice(DitherFamily::One, 1);
    let star = fit::optimal_alpha(&slice, fit::DEFAULT_RATE_TOLERANCE).unwrap();
    assert!(!star.improved, "flat stub CER cannot improve on alpha=0");

    println!(
        "ACCEPTANCE 7 PASS — full-scale CER results need a commercial multi-voice corpus and a \
         specific ASR build, neither reproducible at desk scale; substitute passed: full 9x2x3 \
         grid over a synthetic corpus with a stub ASR command produced deterministic, \
         schema-valid sweep artifacts ({} rows, CER fixed at {:.4}), and the numeric machinery \
         is covered by criteria 1-6",
        table.rows.len(),
        expected_cer
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: CLI determinism
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let pdqc = env!("CARGO_BIN_EXE_pdqc");
    let run = |args: &[&str]| {
        let out = Command::new(pdqc).args(args).output().expect("spawn pdqc");
        assert!(
            out.status.success(),
            "pdqc {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();

    let corpus = dir.path().join("corpus");
    run(&["synth", "--speakers", "2", "--duration", "0.1", "--seed", "21", "--out-dir", &s(&corpus)]);

    // Re-running synth overwrites with identical bytes.
    let first = std::fs::read(corpus.join("synth000.wav")).unwrap();
    run(&["synth", "--speakers", "2", "--duration", "0.1", "--seed", "21", "--out-dir", &s(&corpus)]);
    assert_eq!(first, std::fs::read(corpus.join("synth000.wav")).unwrap());

    let wav = s(&corpus.join("synth001.wav"));
    let e1 = s(&dir.path().join("e1.pdqc"));
    let e2 = s(&dir.path().join("e2.pdqc"));
    for out in [&e1, &e2] {
        run(&[
            "encode", "--input", &wav, "--output", out, "--bits", "2", "--m", "2", "--alpha",
            "0.625", "--seed", "99",
        ]);
    }
    assert_eq!(std::fs::read(&e1).unwrap(), std::fs::read(&e2).unwrap());

    let d1 = s(&dir.path().join("d1.wav"));
    let d2 = s(&dir.path().join("d2.wav"));
    run(&["decode", "--input", &e1, "--output", &d1]);
    run(&["decode", "--input", &e2, "--output", &d2]);
    assert_eq!(std::fs::read(&d1).unwrap(), std::fs::read(&d2).unwrap());

    let o1 = dir.path().join("o1");
    let o2 = dir.path().join("o2");
    for out in [&o1, &o2] {
        run(&[
            "sweep", "--corpus", &s(&corpus), "--bits", "1,2", "--m", "1,2", "--alpha-grid",
            "0,0.5,1", "--seed", "5", "--duration", "0.1", "--jobs", "3", "--out-dir", &s(out),
        ]);
    }
    for name in ["sweep.csv", "sweep.json"] {
        assert_eq!(
            std::fs::read(o1.join(name)).unwrap(),
            std::fs::read(o2.join(name)).unwrap(),
            "{name} not byte-identical"
        );
    }

    // fit-beta and optimal-alpha artifacts are deterministic too (CER comes
    // from a patched table since the metrics-only sweep has none).
    let table = {
        let csv = std::fs::read_to_string(o1.join("sweep.csv")).unwrap();
        let mut t = pdqc::artifacts::parse_sweep_csv(&csv).unwrap().rows;
        for r in &mut t {
            r.cer_mean = Some(0.5 - 0.1 * r.alpha + 0.2 * r.mse);
            r.cer_sem = Some(0.01);
        }
        pdqc::artifacts::sweep_csv(&pdqc_core::fit::SweepTable::new(t).unwrap())
    };
    let patched = s(&dir.path().join("patched.csv"));
    std::fs::write(&patched, &table).unwrap();
    let f1 = dir.path().join("f1");
    let f2 = dir.path().join("f2");
    for out in [&f1, &f2] {
        run(&["fit-beta", "--table", &patched, "--out-dir", &s(out)]);
        run(&["optimal-alpha", "--table", &patched, "--out-dir", &s(out)]);
    }
    for name in ["fits.json", "alpha_star.json"] {
        assert_eq!(
            std::fs::read(f1.join(name)).unwrap(),
            std::fs::read(f2.join(name)).unwrap(),
            "{name} not byte-identical"
        );
    }

    println!(
        "ACCEPTANCE 8 PASS — repeated CLI invocations with identical seeds produced \
         byte-identical encoded streams, decoded WAVs, sweep CSV/JSON, and fit artifacts"
    );
}
