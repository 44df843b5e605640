//! Corpus sweeps over the (family, alpha, bits) grid.
//!
//! Every (file, condition) job encodes, decodes, and measures one buffer;
//! when an ASR client is configured the decoded audio is also written out,
//! transcribed, and scored against a reference transcript taken from the
//! unquantized audio through the same ASR. Jobs run on a bounded worker
//! pool; per-file failures are isolated so one bad file cannot abort a
//! long batch. Dither seeds are derived per (file, condition), independent
//! across jobs but reproducible run to run.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use pdqc_core::analysis;
use pdqc_core::codec;
use pdqc_core::dither::{DitherFamily, DitherSpec};
use pdqc_core::fit::{sem, SweepRow, SweepTable};
use pdqc_core::quantizer::{self, QuantizerConfig};
use pdqc_core::rate;
use pdqc_core::signal::{self, AudioBuffer};

use crate::asr::AsrClient;
use crate::cer;
use crate::{HarnessError, Result};

/// Lag used for the tabulated autocorrelation.
pub const ACF_LAG: usize = 5;

/// Sweep grid and execution knobs.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub families: Vec<DitherFamily>,
    pub bits: Vec<u8>,
    pub seed: u64,
    /// Worker pool width (also bounds concurrent ASR processes).
    pub jobs: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.families.is_empty() || self.bits.is_empty() {
            return Err(HarnessError::Config("alpha/family/bits grids must be nonempty".into()));
        }
        for w in self.alphas.windows(2) {
            if w[1] <= w[0] {
                return Err(HarnessError::Config("alpha grid must be strictly increasing".into()));
            }
        }
        if self.alphas.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(HarnessError::Config("alpha values must lie in [0, 1]".into()));
        }
        if self.jobs == 0 {
            return Err(HarnessError::Config("jobs must be >= 1".into()));
        }
        Ok(())
    }

    /// Default nine-point alpha grid {0, 0.125, ..., 1}.
    pub fn default_alpha_grid() -> Vec<f64> {
        (0..=8).map(|i| i as f64 / 8.0).collect()
    }
}

/// A per-(file, condition) failure kept out of the aggregates.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub file: String,
    pub family: DitherFamily,
    pub alpha: f64,
    pub bits: u8,
    pub reason: String,
}

/// Sweep result: the aggregated table plus isolated failures.
#[derive(Debug)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub failures: Vec<SweepFailure>,
    /// Text normalization policy CER was computed under.
    pub normalization_policy: &'static str,
}

/// Derive the dither seed for one (file, condition) job: FNV-1a over the
/// run seed and condition coordinates, finished with a splitmix64 step.
/// Independent across jobs, reproducible run to run.
pub fn derive_seed(run_seed: u64, file_label: &str, family: DitherFamily, alpha: f64, bits: u8) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = FNV_OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    };
    eat(&run_seed.to_le_bytes());
    eat(file_label.as_bytes());
    eat(&[family.index(), bits]);
    eat(&alpha.to_bits().to_le_bytes());
    // splitmix64 finalizer
    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct JobResult {
    mse: f64,
    acf5: f64,
    entropy_bits: f64,
    huffman_rate_bits: f64,
    cer: Option<std::result::Result<f64, String>>,
}

/// Metrics for one buffer under one condition; `asr` carries the client,
/// the reference transcript, and a scratch directory for decoded WAVs.
/// `alpha_idx` is the grid position, used for collision-free scratch file
/// names regardless of how close grid values sit.
fn run_job(
    buf: &AudioBuffer,
    family: DitherFamily,
    alpha: f64,
    alpha_idx: usize,
    bits: u8,
    seed: u64,
    asr: Option<(&AsrClient, &str, &Path)>,
) -> Result<JobResult> {
    let cfg = QuantizerConfig::mid_rise(bits, 1.0)?;
    let spec = DitherSpec::new(family, alpha, cfg.delta, seed)?;
    let stream = codec::encode(buf, &spec, &cfg)?;
    let decoded = codec::decode(&stream)?;

    let eps: Vec<f64> = buf
        .samples
        .iter()
        .zip(&decoded.samples)
        .map(|(a, b)| b - a)
        .collect();
    let mse = analysis::mse(&eps)?;
    let acf5 = analysis::acf_tau(&eps, ACF_LAG)?;

    // Codebook values sit strictly inside their cells, so re-quantizing the
    // decoded signal recovers the symbol stream exactly.
    let symbols = quantizer::quantize(&decoded.samples, &cfg)?;
    let dist = rate::empirical_bin_probs(&symbols)?;
    let entropy_bits = rate::shannon_entropy(&dist);
    let huffman_rate_bits = stream.payload_bits as f64 / buf.len() as f64;

    let cer = match asr {
        None => None,
        Some((client, reference, scratch)) => {
            let wav_path = scratch.join(format!(
                "{}_m{}_a{alpha_idx:02}_b{}.wav",
                buf.label,
                family.index(),
                bits
            ));
            let outcome = signal::write_pcm(&wav_path, &decoded)
                .map_err(HarnessError::from)
                .and_then(|()| client.transcribe(&wav_path, scratch))
                .and_then(|hyp| {
                    cer::cer(reference, &hyp).map(|r| r.cer).map_err(HarnessError::from)
                });
            Some(outcome.map_err(|e| e.to_string()))
        }
    };

    Ok(JobResult { mse, acf5, entropy_bits, huffman_rate_bits, cer })
}

/// Run the full grid over a corpus.
///
/// Metrics-only mode (no client) never touches an external process or the
/// filesystem. `scratch_dir` is required when a client is configured; it
/// receives decoded WAVs and transcript files.
pub fn run_sweep(
    corpus: &[AudioBuffer],
    config: &SweepConfig,
    client: Option<&AsrClient>,
    scratch_dir: Option<&Path>,
) -> Result<SweepOutcome> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(HarnessError::Config("corpus is empty".into()));
    }
    let scratch = match (client, scratch_dir) {
        (Some(_), None) => {
            return Err(HarnessError::Config("ASR sweeps need a scratch directory".into()))
        }
        (_, dir) => dir,
    };

    // Deterministic file order regardless of discovery order.
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.sort_by(|&a, &b| corpus[a].label.cmp(&corpus[b].label));
    let files: Vec<&AudioBuffer> = order.into_iter().map(|i| &corpus[i]).collect();

    // Reference transcripts from the unquantized audio, once per file.
    // A file whose reference fails is excluded from CER everywhere.
    let references: Vec<Option<std::result::Result<String, String>>> = match (client, scratch) {
        (Some(cl), Some(dir)) => parallel_map(config.jobs, files.len(), |i| {
            let path = dir.join(format!("{}_reference.wav", files[i].label));
            let out = signal::write_pcm(&path, files[i])
                .map_err(HarnessError::from)
                .and_then(|()| cl.transcribe(&path, dir));
            Some(out.map_err(|e| e.to_string()))
        }),
        _ => vec![None; files.len()],
    };

    // One job per (condition, file), conditions ordered (bits, family,
    // alpha) and files in label order within each condition.
    struct JobKey {
        family: DitherFamily,
        alpha: f64,
        alpha_idx: usize,
        bits: u8,
        file_idx: usize,
    }
    let mut keys = Vec::new();
    for &bits in &config.bits {
        for &family in &config.families {
            for (alpha_idx, &alpha) in config.alphas.iter().enumerate() {
                for file_idx in 0..files.len() {
                    keys.push(JobKey { family, alpha, alpha_idx, bits, file_idx });
                }
            }
        }
    }

    let results: Vec<Result<JobResult>> = parallel_map(config.jobs, keys.len(), |k| {
        let key = &keys[k];
        let buf = files[key.file_idx];
        let seed = derive_seed(config.seed, &buf.label, key.family, key.alpha, key.bits);
        let asr = match (client, scratch) {
            (Some(cl), Some(dir)) => match &references[key.file_idx] {
                Some(Ok(reference)) => Some((cl, reference.as_str(), dir)),
                // Reference unavailable: metrics still run, CER is skipped.
                _ => None,
            },
            _ => None,
        };
        run_job(buf, key.family, key.alpha, key.alpha_idx, key.bits, seed, asr)
    });

    // Sequential reduction in key order keeps aggregation deterministic.
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut k = 0usize;
    for &bits in &config.bits {
        for &family in &config.families {
            for &alpha in &config.alphas {
                let mut mses = Vec::new();
                let mut acfs = Vec::new();
                let mut entropies = Vec::new();
                let mut rates = Vec::new();
                let mut cers = Vec::new();
                for file_idx in 0..files.len() {
                    let label = files[file_idx].label.clone();
                    match &results[k] {
                        Ok(job) => {
                            mses.push(job.mse);
                            acfs.push(job.acf5);
                            entropies.push(job.entropy_bits);
                            rates.push(job.huffman_rate_bits);
                            match &job.cer {
                                Some(Ok(c)) => cers.push(*c),
                                Some(Err(reason)) => failures.push(SweepFailure {
                                    file: label,
                                    family,
                                    alpha,
                                    bits,
                                    reason: reason.clone(),
                                }),
                                None => {
                                    if client.is_some() {
                                        if let Some(Err(reason)) = &references[file_idx] {
                                            failures.push(SweepFailure {
                                                file: label,
                                                family,
                                                alpha,
                                                bits,
                                                reason: format!("reference transcript: {reason}"),
                                            });
                                        }
                                    }
                                }
                            }
                        }
                        Err(e) => failures.push(SweepFailure {
                            file: label,
                            family,
                            alpha,
                            bits,
                            reason: e.to_string(),
                        }),
                    }
                    k += 1;
                }
                if mses.is_empty() {
                    continue; // every file failed outright for this condition
                }
                let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
                let (cer_mean, cer_sem) = if cers.is_empty() {
                    (None, None)
                } else {
                    // SEM is undefined below two surviving files.
                    (Some(mean(&cers)), sem(&cers).ok())
                };
                rows.push(SweepRow {
                    family,
                    alpha,
                    bits,
                    files: mses.len(),
                    cer_mean,
                    cer_sem,
                    mse: mean(&mses),
                    acf5: mean(&acfs),
                    entropy_bits: mean(&entropies),
                    huffman_rate_bits: mean(&rates),
                });
            }
        }
    }

    Ok(SweepOutcome {
        table: SweepTable::new(rows)?,
        failures,
        normalization_policy: cer::NORMALIZATION_POLICY,
    })
}

/// Run `f(0..n)` on a pool of `jobs` workers, collecting results in index
/// order so downstream reductions are order-stable.
fn parallel_map<T: Send>(jobs: usize, n: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    if jobs <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let slots: Vec<Mutex<Option<T>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(n) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= n {
                    break;
                }
                *slots[i].lock().unwrap() = Some(f(i));
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().unwrap().unwrap()).collect()
}

/// Load every `.wav` under `dir` (non-recursive), sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<AudioBuffer>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(HarnessError::io(dir.to_string_lossy().into_owned()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(HarnessError::Config(format!("no .wav files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| signal::load_pcm(p).map_err(HarnessError::from))
        .collect()
}
