//! `intimacy`: command-line front end for the corpus, augmentation,
//! baseline and evaluation pipeline.

mod commands;
mod config;
mod manifest;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intimacy_core::augment::AugmentOp;
use intimacy_core::baseline::Optimizer;
use intimacy_core::corpus::StratifyBy;
use intimacy_core::metrics::MetricsError;

use crate::config::{ConfigError, ExperimentConfig};

/// Version of the on-disk formats (corpus, predictions, stats, model and
/// manifest files).
pub const DATA_FORMAT_VERSION: u32 = 1;

const LONG_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (data format 1)");

#[derive(Debug, Parser)]
#[command(name = "intimacy", version = LONG_VERSION, about = "Tweet intimacy corpus tooling, ridge baseline and evaluation")]
struct Cli {
    /// Experiment config (TOML). Flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Global seed; every module seed is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (also settable through INTIMACY_OUTPUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus statistics as JSON or TSV, plus plot-ready TSV tables.
    Stats(StatsArgs),
    /// Stratified train/validation/test split.
    Split(SplitArgs),
    /// EDA-style augmentation of a labelled corpus.
    Augment(AugmentArgs),
    /// Fit the hashed n-gram ridge baseline.
    Train(TrainArgs),
    /// Score a corpus with a saved model and write a predictions file.
    Predict(PredictArgs),
    /// Score a predictions file against a gold corpus.
    Evaluate(EvaluateArgs),
    /// Ablation table from evaluation files, optional plot data from stats.
    Report(ReportArgs),
    /// Split, augment, train with and without augmentation, predict,
    /// evaluate and report in one go.
    RunAll(RunAllArgs),
    /// Write a synthetic corpus with the shape of the public data.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// Corpus file (.csv or .tsv); defaults to paths.train.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Split name recorded in the report.
    #[arg(long, default_value = "train")]
    split_name: String,
    /// Report path; `.tsv` selects the TSV form. Defaults to
    /// `<output-dir>/stats/<split-name>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Three comma-separated ratios, e.g. 0.7,0.1,0.2.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    ratios: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    stratify_by: Option<StratifyArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum StratifyArg {
    Language,
    LanguageAndScoreBin,
}

impl From<StratifyArg> for StratifyBy {
    fn from(a: StratifyArg) -> Self {
        match a {
            StratifyArg::Language => StratifyBy::Language,
            StratifyArg::LanguageAndScoreBin => StratifyBy::LanguageAndScoreBin,
        }
    }
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Directory of `<language>.txt` stopword files.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Comma-separated ops: synonym_replacement, random_insertion,
    /// random_swap, random_deletion.
    #[arg(long, value_delimiter = ',')]
    ops: Option<Vec<AugmentOp>>,
    #[arg(long)]
    n_aug: Option<usize>,
    /// Sets alpha_sr, alpha_ri, alpha_rs and p_rd at once.
    #[arg(long)]
    alpha: Option<f64>,
    /// Output file; defaults to `<output-dir>/augment/augmented.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Augmented examples (as written by `augment`) appended to the input.
    #[arg(long)]
    augmented: Option<PathBuf>,
    /// Validation corpus used to pick lambda; without it the first lambda
    /// is used.
    #[arg(long)]
    validation: Option<PathBuf>,
    /// Comma-separated lambda candidates.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    /// Defaults to `<output-dir>/models/ridge.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum OptimizerArg {
    ClosedForm,
    GradientDescent,
}

impl From<OptimizerArg> for Optimizer {
    fn from(a: OptimizerArg) -> Self {
        match a {
            OptimizerArg::ClosedForm => Optimizer::ClosedForm,
            OptimizerArg::GradientDescent => Optimizer::GradientDescent,
        }
    }
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "ridge")]
    model_tag: String,
    /// Mark the predictions as coming from an augmented-data model.
    #[arg(long)]
    augmented: bool,
    /// Defaults to `<output-dir>/predictions/<model-tag>.tsv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// Reference results (`language\ttop_pearson\trank`); defaults to
    /// paths.references.
    #[arg(long)]
    references: Option<PathBuf>,
    /// JSON sidecar; defaults to `<output-dir>/evaluate/<predictions stem>.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Evaluation JSON files written by `evaluate`.
    #[arg(long, num_args = 1..)]
    evaluations: Vec<PathBuf>,
    /// Stats JSON written by `stats`; plot data is emitted next to the table.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Defaults to `<output-dir>/report`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunAllArgs {}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "train")]
    split: SynthSplit,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SynthSplit {
    Train,
    Test,
    /// Planted-feature corpus with a known linear signal.
    Planted,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use intimacy_core::Error;
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<MetricsError>().is_some() {
            return 4;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Metrics(_) | Error::Singular { .. } => 4,
                Error::InvalidParameter(_) => 2,
                _ => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    2
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = ExperimentConfig::resolve(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = cli.output_dir {
        config.paths.output_dir = dir;
    }
    match cli.command {
        Command::Stats(a) => commands::stats(config, a),
        Command::Split(a) => commands::split(config, a),
        Command::Augment(a) => commands::augment(config, a),
        Command::Train(a) => commands::train(config, a),
        Command::Predict(a) => commands::predict(config, a),
        Command::Evaluate(a) => commands::evaluate(config, a),
        Command::Report(a) => commands::report(config, a),
        Command::RunAll(_) => pipeline::run_all(&config),
        Command::Synth(a) => commands::synth(config, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
