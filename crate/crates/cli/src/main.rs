//! Experiment runner. Every subcommand reads local files only, writes its
//! outputs atomically under `--out`, and drops a `manifest.txt` that re-runs
//! the experiment bit-identically when passed back through `--config`.

mod commands;
mod common;
mod config;
mod error;
mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "gradlab",
    about = "Train, distill, attack, and analyze small image classifiers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Plain-text key=value config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for models, reports, and the run manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed for initialization, shuffling, and attack randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory holding the four IDX dataset files.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Two classes to keep, as `a,b`, or `random` for a seeded draw.
    #[arg(long, global = true)]
    classes: Option<String>,
    /// Numeric precision of the experiment: single or double.
    #[arg(long, global = true)]
    precision: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Architecture id: reference or compact.
    #[arg(long)]
    arch: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Softmax temperature of the training loss.
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Args)]
struct DistillArgs {
    #[command(flatten)]
    train: TrainArgs,
    /// dual trains a teacher and a student; single trains one network.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model file to attack.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Attack name, or a comma-separated list; one CSV per attack.
    #[arg(long)]
    attack: Option<String>,
    /// Perturbation radius for gradient-sign attacks.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Iteration cap for the iterative attacks.
    #[arg(long)]
    steps: Option<usize>,
    /// Number of test samples to attack.
    #[arg(long)]
    samples: Option<usize>,
    /// Restrict the attacked samples to one (reduced) label.
    #[arg(long)]
    sample_class: Option<usize>,
    /// Target selection for targeted attacks: `other` or `fixed:K`.
    #[arg(long)]
    target_policy: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Baseline model for comparisons.
    #[arg(long)]
    plain: Option<PathBuf>,
    /// Distilled model; enables the probe and saturation reports.
    #[arg(long)]
    distilled: Option<PathBuf>,
    /// Optional attack for the perturbed logit panels.
    #[arg(long)]
    attack: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    sample_class: Option<usize>,
    #[arg(long)]
    target_policy: Option<String>,
}

#[derive(Args)]
struct TransferArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model the examples are crafted against.
    #[arg(long)]
    surrogate: Option<PathBuf>,
    /// Model the crafted examples are evaluated on.
    #[arg(long)]
    victim: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Digit classes to generate, comma-separated.
    #[arg(long)]
    synth_classes: Option<String>,
    #[arg(long)]
    train_per_class: Option<usize>,
    #[arg(long)]
    test_per_class: Option<usize>,
    /// Additive pixel noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a plain classifier and persist the model plus its report.
    Train(TrainArgs),
    /// Run a distillation pipeline (dual or single phase).
    Distill(DistillArgs),
    /// Attack a persisted model and emit per-sample CSVs.
    Attack(AttackArgs),
    /// Logit-plane scans, gradient probes, saturation reports, and figures.
    Analyze(AnalyzeArgs),
    /// Craft examples on a surrogate model, evaluate them on a victim.
    Transfer(TransferArgs),
    /// Generate the synthetic digit dataset as IDX files.
    SynthData(SynthArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            if err.use_stderr() {
                eprintln!("{err}");
                std::process::exit(1);
            }
            print!("{err}");
            std::process::exit(0);
        }
    };
    let outcome = match cli.command {
        Command::Train(args) => commands::train::run(args),
        Command::Distill(args) => commands::distill::run(args),
        Command::Attack(args) => commands::attack::run(args),
        Command::Analyze(args) => commands::analyze::run(args),
        Command::Transfer(args) => commands::transfer::run(args),
        Command::SynthData(args) => commands::synth::run(args),
    };
    match outcome {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}

pub(crate) use error::Result;

pub(crate) fn out_dir(common: &CommonArgs, config: &config::Config) -> Result<PathBuf> {
    let out = config.resolve_opt(
        "out",
        common.out.as_ref().map(|p| p.display().to_string()),
    )?;
    let out = out.ok_or_else(|| CliError::Validation("no output directory; pass --out".into()))?;
    let path = PathBuf::from(out);
    io::ensure_out_dir(&path)?;
    Ok(path)
}
