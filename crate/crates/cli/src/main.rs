use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use harmotrack::{
    analyze, eval_ger, eval_mae, eval_ter, oracle_voicing, plot_data, read_audio, read_track, synth_signal,
    write_audio, write_track, GroundTruth, SynthConfig, TrackConfig64, TrackFormat, WavEncoding, WhitenMode,
};

#[derive(Parser)]
#[command(name = "harmotrack", version, about = "Bayesian harmonic-model pitch tracker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Track pitch and voicing in a mono WAV file.
    Track(TrackArgs),
    /// Score a track against a reference pitch file.
    Eval(EvalArgs),
    /// Write a synthetic harmonic signal in white Gaussian noise.
    Synth(SynthArgs),
    /// Print `time f0` columns of a track for plotting.
    Plotdata {
        #[arg(long)]
        est: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Prewhiten {
    Off,
    Adaptive,
    Known(PathBuf),
}

impl FromStr for Prewhiten {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(Self::Off),
            "adaptive" => Ok(Self::Adaptive),
            _ => match s.strip_prefix("known:") {
                Some(p) if !p.is_empty() => Ok(Self::Known(PathBuf::from(p))),
                _ => Err(format!("expected off, adaptive or known:<noise.wav>, got `{s}`")),
            },
        }
    }
}

#[derive(Args)]
struct TrackArgs {
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Write JSON instead of CSV.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 70.0)]
    fmin: f64,
    #[arg(long, default_value_t = 400.0)]
    fmax: f64,
    #[arg(long, default_value_t = 10)]
    kmax: usize,
    /// Pitch-grid DFT size.
    #[arg(long, default_value_t = 16384)]
    dft_size: usize,
    #[arg(long, default_value_t = 25.0)]
    frame_ms: f64,
    #[arg(long, default_value_t = 10.0)]
    hop_ms: f64,
    #[arg(long, default_value_t = 4.0)]
    delta: f64,
    /// Pitch transition variance in (rad/sample)²; defaults to 16π²/f_s².
    #[arg(long)]
    sigma_omega2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma_k2: f64,
    /// p(voiced | previous unvoiced).
    #[arg(long = "p-u1u0", default_value_t = 0.4)]
    p_u1u0: f64,
    /// p(unvoiced | previous voiced).
    #[arg(long = "p-u0u1", default_value_t = 0.3)]
    p_u0u1: f64,
    /// off, adaptive or known:<noise.wav>.
    #[arg(long, default_value = "off")]
    prewhiten: Prewhiten,
    #[arg(long, default_value_t = 30)]
    lp_order: usize,
    /// Write the most probable voiced pitch in every frame, for MAE under
    /// oracle voicing.
    #[arg(long)]
    oracle_f0: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Ter,
    Ger,
    Mae,
    All,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    est: PathBuf,
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    metric: Metric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Encoding {
    Pcm16,
    Float32,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    f0: f64,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 16000)]
    fs: u32,
    /// Duration in seconds.
    #[arg(long, default_value_t = 1.0)]
    dur: f64,
    /// Signal-to-noise ratio in dB; `inf` for a clean signal.
    #[arg(long, default_value = "inf", allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "float32")]
    encoding: Encoding,
}

fn track_config(args: &TrackArgs) -> Result<TrackConfig64> {
    let mut cfg = TrackConfig64 {
        f_min: args.fmin,
        f_max: args.fmax,
        dft_size: args.dft_size,
        k_max: args.kmax,
        frame_ms: args.frame_ms,
        hop_ms: args.hop_ms,
        delta: args.delta,
        sigma_omega2: args.sigma_omega2,
        sigma_k2: args.sigma_k2,
        p_u1_given_u0: args.p_u1u0,
        p_u0_given_u1: args.p_u0u1,
        ..Default::default()
    };
    cfg.whiten.lp_order = args.lp_order;
    match &args.prewhiten {
        Prewhiten::Off => {}
        Prewhiten::Adaptive => cfg.whiten.mode = WhitenMode::Adaptive,
        Prewhiten::Known(path) => {
            let (noise, _) = read_audio::<f64>(path).context("reading noise reference")?;
            cfg.whiten.mode = WhitenMode::KnownNoise;
            cfg.whiten.noise_reference = Some(noise);
        }
    }
    Ok(cfg)
}

fn run_track(args: &TrackArgs) -> Result<()> {
    let cfg = track_config(args)?;
    let (x, fs) = read_audio::<f64>(&args.input)?;
    if let Prewhiten::Known(path) = &args.prewhiten {
        let (_, noise_fs) = read_audio::<f64>(path)?;
        if noise_fs != fs {
            bail!("noise reference is sampled at {noise_fs} Hz but the input at {fs} Hz");
        }
    }
    let mut est = analyze(&x, fs, &cfg)?;
    if args.oracle_f0 {
        est = oracle_voicing(&est);
    }
    let format = if args.json { TrackFormat::Json } else { TrackFormat::Csv };
    write_track(&est, &args.out, format)?;
    Ok(())
}

fn run_eval(args: &EvalArgs) -> Result<()> {
    let est = read_track(&args.est)?;
    let truth = GroundTruth::read(&args.reference)?;
    let mut lines = Vec::new();
    if matches!(args.metric, Metric::Ter | Metric::All) {
        lines.push(format!("ter={:.6}", eval_ter(&est, &truth)?));
    }
    if matches!(args.metric, Metric::Ger | Metric::All) {
        lines.push(format!("ger={:.6}", eval_ger(&est, &truth)?));
    }
    if matches!(args.metric, Metric::Mae | Metric::All) {
        lines.push(format!("mae={:.6}", eval_mae(&est, &truth)?));
    }
    println!("{}", lines.join("\n"));
    Ok(())
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let x = synth_signal(&SynthConfig {
        f0: args.f0,
        order: args.k,
        sample_rate: f64::from(args.fs),
        duration: args.dur,
        snr_db: args.snr_db,
        weights: None,
        seed: args.seed,
    })?;
    let encoding = match args.encoding {
        Encoding::Pcm16 => WavEncoding::Pcm16,
        Encoding::Float32 => WavEncoding::Float32,
    };
    write_audio(&args.out, &x, args.fs, encoding)?;
    Ok(())
}

fn run_plotdata(est: &Path) -> Result<()> {
    print!("{}", plot_data(&read_track(est)?));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Track(a) => run_track(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
        Command::Plotdata { est } => run_plotdata(est),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("harmotrack: {msg}");
            ExitCode::FAILURE
        }
    }
}
