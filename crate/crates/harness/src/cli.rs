//! Command-line interface: encode/decode single files, analyze one
//! condition, run corpus sweeps, fit the performance model, select the
//! operating point, and synthesize desk-scale corpora.
//!
//! Every flag can also be set through a `DITHER_CODEC_`-prefixed
//! environment variable.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pdqc_core::analysis;
use pdqc_core::codec;
use pdqc_core::dither::{DitherFamily, DitherSpec};
use pdqc_core::fit;
use pdqc_core::quantizer::{QuantizerConfig, QuantizerMode};
use pdqc_core::rate;
use pdqc_core::signal::{self, LaplacianSource};

use crate::artifacts;
use crate::asr::AsrClient;
use crate::sweep::{self, SweepConfig};
use crate::{HarnessError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "pdqc",
    about = "Parametric-dither quantization codec and evaluation harness",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a WAV file into a dithered, Huffman-coded bitstream.
    Encode(EncodeArgs),
    /// Decode a bitstream back to 16-bit PCM WAV.
    Decode(DecodeArgs),
    /// Error and rate metrics for one file (or synthetic source) under one
    /// dither condition.
    Analyze(AnalyzeArgs),
    /// Full (family x alpha x bits) sweep over a WAV corpus.
    Sweep(SweepArgs),
    /// Fit the performance-model weight beta* from a sweep table.
    FitBeta(FitBetaArgs),
    /// Select the operating point alpha* from a sweep table.
    OptimalAlpha(OptimalAlphaArgs),
    /// Generate a synthetic Laplacian corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ConditionArgs {
    /// Quantizer bit depth.
    #[arg(long, env = "DITHER_CODEC_BITS", default_value_t = 1)]
    pub bits: u8,
    /// Dither family (1 or 2).
    #[arg(long, env = "DITHER_CODEC_M", default_value_t = 1)]
    pub m: u8,
    /// Dither amount in [0, 1].
    #[arg(long, env = "DITHER_CODEC_ALPHA", default_value_t = 1.0)]
    pub alpha: f64,
    /// RNG seed for the dither stream.
    #[arg(long, env = "DITHER_CODEC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Use the mid-tread quantizer instead of the mid-rise default.
    #[arg(long, default_value_t = false)]
    pub mid_tread: bool,
}

impl ConditionArgs {
    fn quantizer(&self) -> Result<QuantizerConfig> {
        let mode = if self.mid_tread { QuantizerMode::MidTread } else { QuantizerMode::MidRise };
        Ok(QuantizerConfig::new(self.bits, mode, 1.0)?)
    }

    fn dither(&self, delta: f64) -> Result<DitherSpec> {
        Ok(DitherSpec::new(DitherFamily::from_index(self.m)?, self.alpha, delta, self.seed)?)
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Input WAV (16-bit linear PCM).
    #[arg(long)]
    pub input: PathBuf,
    /// Output bitstream path.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub condition: ConditionArgs,
    /// Trim to this many seconds before peak normalization.
    #[arg(long, default_value_t = 20.0)]
    pub duration: f64,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Input bitstream path.
    #[arg(long)]
    pub input: PathBuf,
    /// Output WAV path.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input WAV; omit to analyze a synthetic Laplacian source.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Synthetic source scale when no input file is given.
    #[arg(long, default_value_t = 0.1)]
    pub synth_c: f64,
    /// Synthetic source length in samples.
    #[arg(long, default_value_t = 1_000_000)]
    pub synth_n: usize,
    #[command(flatten)]
    pub condition: ConditionArgs,
    /// Autocorrelation lags to report.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 5, 10])]
    pub taus: Vec<usize>,
    /// PSD moving-average window, in DFT bins.
    #[arg(long, default_value_t = 480)]
    pub smooth_window: usize,
    /// Trim to this many seconds before peak normalization (file input).
    #[arg(long, default_value_t = 20.0)]
    pub duration: f64,
    #[arg(long, env = "DITHER_CODEC_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Directory of input WAV files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Bit depths to sweep.
    #[arg(long, env = "DITHER_CODEC_BITS", value_delimiter = ',', default_values_t = vec![1u8, 2, 3])]
    pub bits: Vec<u8>,
    /// Dither families to sweep.
    #[arg(long, env = "DITHER_CODEC_M", value_delimiter = ',', default_values_t = vec![1u8, 2])]
    pub m: Vec<u8>,
    /// Alpha grid; defaults to {0, 0.125, ..., 1}.
    #[arg(long, env = "DITHER_CODEC_ALPHA_GRID", value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    #[arg(long, env = "DITHER_CODEC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// External ASR command template with {in} and {out} placeholders;
    /// metrics-only when omitted.
    #[arg(long, env = "DITHER_CODEC_ASR_CMD")]
    pub asr_cmd: Option<String>,
    /// Per-invocation ASR timeout in seconds.
    #[arg(long, env = "DITHER_CODEC_ASR_TIMEOUT", default_value_t = 600)]
    pub asr_timeout: u64,
    /// Worker pool width (also bounds concurrent ASR processes).
    #[arg(long, env = "DITHER_CODEC_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Trim to this many seconds before peak normalization.
    #[arg(long, default_value_t = 20.0)]
    pub duration: f64,
    #[arg(long, env = "DITHER_CODEC_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitBetaArgs {
    /// Sweep CSV produced by `pdqc sweep`.
    #[arg(long)]
    pub table: PathBuf,
    /// Beta grid step.
    #[arg(long, default_value_t = fit::DEFAULT_BETA_STEP)]
    pub beta_step: f64,
    #[arg(long, env = "DITHER_CODEC_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimalAlphaArgs {
    /// Sweep CSV produced by `pdqc sweep`.
    #[arg(long)]
    pub table: PathBuf,
    /// Rate tolerance (bits/symbol) for the constant-rate regime.
    #[arg(long, default_value_t = fit::DEFAULT_RATE_TOLERANCE)]
    pub rate_tolerance: f64,
    #[arg(long, env = "DITHER_CODEC_OUT_DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of synthetic speakers (one WAV each).
    #[arg(long, default_value_t = 4)]
    pub speakers: usize,
    /// Duration per file, seconds at 48 kHz.
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    /// Laplacian scale parameter.
    #[arg(long, default_value_t = 0.1)]
    pub c: f64,
    /// Laplacian location parameter.
    #[arg(long, default_value_t = 0.0)]
    pub mu: f64,
    #[arg(long, env = "DITHER_CODEC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "DITHER_CODEC_OUT_DIR")]
    pub out_dir: PathBuf,
}

// ---------------------------------------------------------------------------
// Command implementations
// ---------------------------------------------------------------------------

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode(args) => run_encode(args),
        Command::Decode(args) => run_decode(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::FitBeta(args) => run_fit_beta(args),
        Command::OptimalAlpha(args) => run_optimal_alpha(args),
        Command::Synth(args) => run_synth(args),
    }
}

fn run_encode(args: EncodeArgs) -> Result<()> {
    let raw = signal::load_pcm(&args.input)?;
    let buf = signal::normalize_trim(&raw, args.duration)?;
    let cfg = args.condition.quantizer()?;
    let spec = args.condition.dither(cfg.delta)?;
    let stream = codec::encode(&buf, &spec, &cfg)?;
    let bytes = stream.to_bytes();
    std::fs::write(&args.output, &bytes)
        .map_err(HarnessError::io(args.output.to_string_lossy().into_owned()))?;
    println!(
        "encoded {} samples at b={} m={} alpha={}: {} bytes ({} bits/sample)",
        buf.len(),
        args.condition.bits,
        args.condition.m,
        args.condition.alpha,
        bytes.len(),
        stream.payload_bits as f64 / buf.len() as f64,
    );
    Ok(())
}

fn run_decode(args: DecodeArgs) -> Result<()> {
    let bytes = std::fs::read(&args.input)
        .map_err(HarnessError::io(args.input.to_string_lossy().into_owned()))?;
    let decoded = codec::decode_bytes(&bytes)?;
    signal::write_pcm(&args.output, &decoded)?;
    println!("decoded {} samples at {} Hz", decoded.len(), decoded.sample_rate);
    Ok(())
}

#[derive(Debug, Serialize)]
struct AnalyzeJson {
    source: String,
    n: usize,
    sample_rate: u32,
    bits: u8,
    m: u8,
    alpha: f64,
    seed: u64,
    laplace_c_estimate: f64,
    mse: f64,
    acf: Vec<(usize, f64)>,
    shannon_entropy_empirical: f64,
    /// Expected bits/symbol of the stream's Huffman code.
    huffman_expected_bits: f64,
    /// Realized payload bits/symbol.
    huffman_rate_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gaussian_bound_bits: Option<f64>,
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let (buf, source) = match &args.input {
        Some(path) => {
            let raw = signal::load_pcm(path)?;
            (signal::normalize_trim(&raw, args.duration)?, path.display().to_string())
        }
        None => {
            let src = LaplacianSource::new(0.0, args.synth_c, args.condition.seed)?;
            let buf = signal::sample_laplacian(&src, args.synth_n)?;
            (buf, format!("laplacian(c={})", args.synth_c))
        }
    };
    let cfg = args.condition.quantizer()?;
    let spec = args.condition.dither(cfg.delta)?;

    let report = analysis::error_report(&buf.samples, &spec, &cfg, &args.taus, args.smooth_window)?;

    let stream = codec::encode(&buf, &spec, &cfg)?;
    let decoded = codec::decode(&stream)?;
    let symbols = pdqc_core::quantizer::quantize(&decoded.samples, &cfg)?;
    let dist = rate::empirical_bin_probs(&symbols)?;
    let (_, c_hat) = signal::laplace_mle(&buf.samples)?;
    let rate_report = rate::rate_report(&dist, &spec, &cfg, c_hat)?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(HarnessError::io(args.out_dir.to_string_lossy().into_owned()))?;
    artifacts::write(&args.out_dir.join("psd.csv"), &report.psd_csv(buf.sample_rate))?;

    // Analytic entropy curves at the MLE scale, both families, this depth.
    let mut curve = Vec::new();
    for m in [DitherFamily::One, DitherFamily::Two] {
        for i in 0..=8 {
            let alpha = i as f64 / 8.0;
            let sp = DitherSpec::new(m, alpha, cfg.delta, 0)?;
            let analytic = rate::analytic_bin_probs(c_hat, &sp, &cfg)?;
            let report = rate::rate_report(&analytic, &sp, &cfg, c_hat)?;
            curve.push(artifacts::EntropyCurveRow {
                m: m.index(),
                alpha,
                bits: cfg.bits,
                analytic_entropy_bits: report.shannon_entropy,
                huffman_expected_bits: report.huffman_avg_length,
                gaussian_bound_bits: report.gaussian_bound,
            });
        }
    }
    artifacts::write(&args.out_dir.join("entropy_curve.csv"), &artifacts::entropy_curve_csv(&curve))?;

    let doc = AnalyzeJson {
        source,
        n: report.n,
        sample_rate: buf.sample_rate,
        bits: args.condition.bits,
        m: args.condition.m,
        alpha: args.condition.alpha,
        seed: args.condition.seed,
        laplace_c_estimate: c_hat,
        mse: report.mse,
        acf: report.acf.iter().map(|(&t, &v)| (t, v)).collect(),
        shannon_entropy_empirical: rate_report.shannon_entropy,
        huffman_expected_bits: rate_report.huffman_avg_length,
        huffman_rate_bits: stream.payload_bits as f64 / buf.len() as f64,
        gaussian_bound_bits: rate_report.gaussian_bound,
    };
    let json = serde_json::to_string_pretty(&doc).expect("analyze json");
    artifacts::write(&args.out_dir.join("report.json"), &json)?;
    println!("{json}");
    Ok(())
}

fn run_sweep_cmd(args: SweepArgs) -> Result<()> {
    let corpus_raw = sweep::load_corpus(&args.corpus)?;
    let corpus: Vec<_> = corpus_raw
        .iter()
        .map(|b| signal::normalize_trim(b, args.duration))
        .collect::<std::result::Result<_, _>>()?;

    let families = args
        .m
        .iter()
        .map(|&m| DitherFamily::from_index(m).map_err(HarnessError::from))
        .collect::<Result<Vec<_>>>()?;
    let config = SweepConfig {
        alphas: args.alpha_grid.clone().unwrap_or_else(SweepConfig::default_alpha_grid),
        families,
        bits: args.bits.clone(),
        seed: args.seed,
        jobs: args.jobs,
    };

    std::fs::create_dir_all(&args.out_dir)
        .map_err(HarnessError::io(args.out_dir.to_string_lossy().into_owned()))?;
    let client = args.asr_cmd.as_ref().map(|cmd| AsrClient::new(cmd.clone(), args.asr_timeout));
    let scratch = args.out_dir.join("scratch");
    let scratch_ref = if client.is_some() {
        std::fs::create_dir_all(&scratch)
            .map_err(HarnessError::io(scratch.to_string_lossy().into_owned()))?;
        Some(scratch.as_path())
    } else {
        None
    };

    let outcome = sweep::run_sweep(&corpus, &config, client.as_ref(), scratch_ref)?;

    artifacts::write(&args.out_dir.join("sweep.csv"), &artifacts::sweep_csv(&outcome.table))?;
    artifacts::write(&args.out_dir.join("sweep.json"), &artifacts::sweep_json(&outcome, args.seed))?;
    println!(
        "swept {} conditions over {} files ({} failures) -> {}",
        outcome.table.rows.len(),
        corpus.len(),
        outcome.failures.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn run_fit_beta(args: FitBetaArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.table)
        .map_err(HarnessError::io(args.table.to_string_lossy().into_owned()))?;
    let table = artifacts::parse_sweep_csv(&text)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(HarnessError::io(args.out_dir.to_string_lossy().into_owned()))?;

    let mut fits = Vec::new();
    for (family, bits) in table.conditions() {
        let slice = table.slice(family, bits);
        let fit = fit::fit_beta(&slice, args.beta_step)?;
        let csv = artifacts::scaled_model_csv(&slice, &fit);
        artifacts::write(
            &args.out_dir.join(format!("model_fit_m{}_b{bits}.csv", family.index())),
            &csv,
        )?;
        fits.push((family, bits, fit));
    }
    let json = artifacts::fits_json(&fits);
    artifacts::write(&args.out_dir.join("fits.json"), &json)?;
    println!("{json}");
    Ok(())
}

fn run_optimal_alpha(args: OptimalAlphaArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.table)
        .map_err(HarnessError::io(args.table.to_string_lossy().into_owned()))?;
    let table = artifacts::parse_sweep_csv(&text)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(HarnessError::io(args.out_dir.to_string_lossy().into_owned()))?;

    let mut stars = Vec::new();
    for (family, bits) in table.conditions() {
        let slice = table.slice(family, bits);
        let star = fit::optimal_alpha(&slice, args.rate_tolerance)?;
        stars.push((family, bits, star));
    }
    let json = artifacts::alpha_star_json(&stars);
    artifacts::write(&args.out_dir.join("alpha_star.json"), &json)?;
    println!("{json}");
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(HarnessError::io(args.out_dir.to_string_lossy().into_owned()))?;
    let n = (args.duration * signal::SYNTH_SAMPLE_RATE as f64).round() as usize;
    for i in 0..args.speakers {
        let src = LaplacianSource::new(args.mu, args.c, args.seed.wrapping_add(i as u64))?;
        let mut buf = signal::sample_laplacian(&src, n.max(1))?;
        buf.label = format!("synth{i:03}");
        let path = args.out_dir.join(format!("synth{i:03}.wav"));
        signal::write_pcm(&path, &buf)?;
    }
    println!("wrote {} files x {} samples to {}", args.speakers, n.max(1), args.out_dir.display());
    Ok(())
}
