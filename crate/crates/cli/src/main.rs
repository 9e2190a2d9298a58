//! `fingermimic`: controller tuning, training, evaluation and sweep analysis
//! for the simulated hand.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 1 for
//! failures while running.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fingermimic::config::ExperimentConfig;
use fingermimic::motion::SynthKind;
use fingermimic::rl::{Algo, SweepMode};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Run(#[from] fingermimic::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn config_err(e: impl ToString) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Debug, Clone, Parser)]
#[command(name = "fingermimic", version, about = "Motion imitation for a PD-actuated robotic hand")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Overrides the configured seed (and the training seed list).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory [default: out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Hold,
    Ramp,
    Sinusoid,
}

impl From<KindArg> for SynthKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Hold => SynthKind::Hold,
            KindArg::Ramp => SynthKind::Ramp,
            KindArg::Sinusoid => SynthKind::Sinusoid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Ppo,
    Sac,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Ppo => Algo::Ppo,
            AlgoArg::Sac => Algo::Sac,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Bayes,
    Grid,
    Random,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bayes => SweepMode::Bayes,
            ModeArg::Grid => SweepMode::Grid,
            ModeArg::Random => SweepMode::Random,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Reduce a pose export (angles or per-joint axis-angle) to a motion file.
    Convert {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to <out>/<input stem>.motion.json.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic reference motion.
    Synth {
        #[arg(long, value_enum, default_value = "sinusoid")]
        kind: KindArg,
        #[arg(long, default_value_t = 1.0)]
        center: f64,
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.5)]
        frequency: f64,
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        /// Defaults to <out>/<kind>.motion.json.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Bayesian tuning of kp, kd; all three bounds unless --bound is given.
    TuneController {
        #[arg(long, value_parser = ["100", "10", "1"])]
        bound: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        motion: Option<PathBuf>,
        /// Also scan an N x N grid for the true minimum.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Train PPO or SAC, one run per seed.
    Train {
        #[arg(long, value_enum)]
        algo: Option<AlgoArg>,
        #[arg(long)]
        total_steps: Option<u64>,
        #[arg(long)]
        motion: Option<PathBuf>,
        /// Comma-separated seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Evaluate a checkpoint, or the retargeting oracle when none is given.
    Evaluate {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long)]
        motion: Option<PathBuf>,
    },
    /// Retargeting and random-action baselines.
    Retarget {
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long)]
        motion: Option<PathBuf>,
    },
    /// Retargeting vs PPO vs SAC table. Checkpoints for motion M are read
    /// from <checkpoints>/<M stem>/*.checkpoint.json.
    Compare {
        #[arg(long)]
        motion: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        checkpoints: PathBuf,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Also print the published comparison.
        #[arg(long)]
        published: bool,
    },
    /// PPO hyperparameter search over the configured grid.
    Sweep {
        #[arg(long, value_enum, default_value = "bayes")]
        mode: ModeArg,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        total_steps: Option<u64>,
    },
    /// Correlation statistics of a sweep file or the bundled fixture.
    Analyze {
        #[arg(long, conflicts_with = "fixture")]
        sweep: Option<PathBuf>,
        #[arg(long, value_parser = ["tableA1"])]
        fixture: Option<String>,
        /// Also write an SVG heatmap.
        #[arg(long)]
        svg: bool,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Convert { .. } => "convert",
            Command::Synth { .. } => "synth",
            Command::TuneController { .. } => "tune-controller",
            Command::Train { .. } => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::Retarget { .. } => "retarget",
            Command::Compare { .. } => "compare",
            Command::Sweep { .. } => "sweep",
            Command::Analyze { .. } => "analyze",
            Command::Replay { .. } => "replay",
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p).map_err(config_err),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    if let Command::Replay { manifest } = &cli.command {
        return manifest::replay(manifest, cli.out.as_deref());
    }
    let base = load_config(cli.config.as_deref())?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    commands::execute(&cli, base, &out, manifest::recorded_args(&argv))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("FINGERMIMIC_LOG", "info")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
