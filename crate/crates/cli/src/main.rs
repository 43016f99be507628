mod commands;
mod config;
mod error;
mod input;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::report::Format;

/// Utility-based evaluation of binary classifiers.
#[derive(Debug, Parser)]
#[command(name = "utileval", version)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Master seed, decimal or 0x-prefixed hex. Overrides the config file.
    #[arg(long, global = true, env = "UTILEVAL_SEED", value_parser = parse_seed)]
    pub seed: Option<u64>,
    /// Directory for report files.
    #[arg(long, global = true, env = "UTILEVAL_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Uniform,
    Gaussian,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Confusion matrix, utility yield and every registry metric of one
    /// predictions file.
    Evaluate {
        /// CSV with header true_label,predicted_label.
        predictions: PathBuf,
        /// JSON utilities file (see the README for its fields).
        #[arg(long)]
        utilities: PathBuf,
    },
    /// Orders classifiers evaluated on the same test set by utility yield.
    Rank {
        #[arg(required = true)]
        predictions: Vec<PathBuf>,
        /// JSON utilities file (see the README for its fields).
        #[arg(long)]
        utilities: PathBuf,
    },
    /// Runs the pairwise misranking experiment and writes simulation.json and
    /// simulation.csv to --out (default: current directory).
    Simulate {
        /// JSON utilities file (see the README for its fields).
        #[arg(long)]
        utilities: Option<PathBuf>,
        /// Pairs per estimate.
        #[arg(long)]
        pairs: Option<u64>,
        /// Error levels of the noisy-utility evaluator, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        sigma: Option<Vec<f64>>,
        /// Prior over utility matrices.
        #[arg(long, value_enum)]
        prior: Option<PriorArg>,
        /// Standard deviation of the gaussian prior.
        #[arg(long)]
        prior_sigma: Option<f64>,
        /// Pairs per deterministic work unit.
        #[arg(long)]
        chunk_size: Option<u64>,
        /// Worker threads. Results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        /// Metrics to evaluate (default: the whole registry).
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        metrics: Option<Vec<String>>,
    },
    /// Tests whether metrics rank classifiers like some utility yield.
    Compliance {
        /// Metric names (default: the whole registry).
        metrics: Vec<String>,
        /// Confusion matrices sampled per class frequency.
        #[arg(long, default_value_t = 300)]
        samples: usize,
        /// Class-0 frequencies to test, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        grid: Option<Vec<f64>>,
        /// Write reversal pairs to witnesses.csv in --out.
        #[arg(long)]
        witness: bool,
    },
    /// AUC and utility-optimal operating point of one or more ROC curves.
    Roc {
        /// CSV with header true_label,score or fpr,tpr.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// JSON utilities file (see the README for its fields).
        #[arg(long)]
        utilities: PathBuf,
        /// Proportion of class 0 in the deployment test set.
        #[arg(long)]
        balance: Option<f64>,
    },
    /// Yield against metric score for sampled classifiers, with reversal pairs
    /// flagged.
    Scatter {
        /// JSON utilities file (see the README for its fields).
        #[arg(long)]
        utilities: PathBuf,
        /// Metric on the vertical axis.
        #[arg(long, default_value = "accuracy")]
        metric: String,
        /// Class-0 frequency of the test set.
        #[arg(long, default_value_t = 0.5)]
        balance: f64,
        /// Sampled classifiers.
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// Reversal pairs to add.
        #[arg(long, default_value_t = 3)]
        witnesses: usize,
        /// Also draw the scatter as an SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
