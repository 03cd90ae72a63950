//! `ssp`: prepare knowledge graph data, train embeddings, and evaluate them.

mod commands;
mod manifest;
mod prepared;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use ssp_core::evalsuite::RankSetting;
use ssp_core::{ModelKind, Split, TieBreak};

use commands::{Analysis, LinkTask};

#[derive(Parser)]
#[command(
    name = "ssp",
    version,
    about = "Knowledge graph embedding with topic-guided hyperplane projection"
)]
struct Cli {
    /// Worker threads for evaluation (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// More progress output on stderr; repeat for debug output.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    /// Only report errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    Optimistic,
    Pessimistic,
}

impl From<Ties> for TieBreak {
    fn from(t: Ties) -> Self {
        match t {
            Ties::Optimistic => TieBreak::Optimistic,
            Ties::Pessimistic => TieBreak::Pessimistic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Setting {
    Raw,
    Filtered,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalysisKind {
    RankPairs,
    ScoreDiff,
    All,
}

#[derive(clap::Args)]
struct EvalOpts {
    /// Directory written by `ssp prep`.
    #[arg(long)]
    prepared: PathBuf,
    /// Checkpoint directory, e.g. `<train out>/final`.
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value = "test")]
    split: Split,
    #[arg(long, value_enum, default_value_t = Ties::Optimistic)]
    ties: Ties,
    /// Directory for the CSV report.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Encode triples and descriptions into a prepared-data directory.
    Prep {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        valid: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        /// `entity<TAB>text` description file.
        #[arg(long = "desc")]
        descriptions: Option<PathBuf>,
        /// Config file supplying `min_count` and `stopwords`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        min_count: Option<usize>,
        #[arg(long)]
        stopwords: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model and write checkpoints, the loss trajectory, and a run manifest.
    Train {
        #[arg(long)]
        prepared: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// transe, ssp-std, or ssp-joint.
        #[arg(long)]
        model: ModelKind,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Entity link prediction (head and tail).
    EvalLink(EvalOpts),
    /// Relation prediction.
    EvalRel(EvalOpts),
    /// Multi-label entity type classification scored by MAP.
    EvalClass {
        #[arg(long)]
        prepared: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Training labels, `entity<TAB>type1,type2,...`.
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        test_labels: PathBuf,
        /// Descriptions of test entities outside the graph.
        #[arg(long)]
        zero_shot_desc: Option<PathBuf>,
        /// Classifier settings; defaults to the checkpoint's config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a model against a baseline checkpoint.
    Analyze {
        #[arg(long)]
        prepared: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long, value_enum, default_value_t = AnalysisKind::All)]
        analysis: AnalysisKind,
        #[arg(long, default_value = "test")]
        split: Split,
        #[arg(long, value_enum, default_value_t = Setting::Raw)]
        setting: Setting,
        #[arg(long, default_value_t = 0.5)]
        bin_width: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();
}

fn run(cli: Cli, command_line: String) -> anyhow::Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Prep {
            train,
            valid,
            test,
            descriptions,
            config,
            min_count,
            stopwords,
            out,
        } => commands::prep(commands::PrepArgs {
            train: &train,
            valid: valid.as_deref(),
            test: test.as_deref(),
            descriptions: descriptions.as_deref(),
            config: config.as_deref(),
            min_count,
            stopwords,
            out: &out,
        }),
        Command::Train {
            prepared,
            config,
            model,
            seed,
            out,
        } => commands::train_cmd(commands::TrainArgs {
            prepared: &prepared,
            config: config.as_deref(),
            model,
            seed,
            out: &out,
            command: command_line,
        }),
        Command::EvalLink(o) => eval(LinkTask::Entity, &o),
        Command::EvalRel(o) => eval(LinkTask::Relation, &o),
        Command::EvalClass {
            prepared,
            checkpoint,
            labels,
            test_labels,
            zero_shot_desc,
            config,
            out,
        } => commands::eval_class(commands::ClassArgs {
            prepared: &prepared,
            checkpoint: &checkpoint,
            labels: &labels,
            test_labels: &test_labels,
            zero_shot: zero_shot_desc.as_deref(),
            config: config.as_deref(),
            out: &out,
        }),
        Command::Analyze {
            prepared,
            checkpoint,
            baseline,
            analysis,
            split,
            setting,
            bin_width,
            out,
        } => commands::analyze(commands::AnalyzeArgs {
            prepared: &prepared,
            checkpoint: &checkpoint,
            baseline: &baseline,
            analysis: match analysis {
                AnalysisKind::RankPairs => Analysis::RankPairs,
                AnalysisKind::ScoreDiff => Analysis::ScoreDiff,
                AnalysisKind::All => Analysis::All,
            },
            split,
            setting: match setting {
                Setting::Raw => RankSetting::Raw,
                Setting::Filtered => RankSetting::Filtered,
            },
            bin_width,
            out: &out,
        }),
    }
}

fn eval(task: LinkTask, o: &EvalOpts) -> anyhow::Result<()> {
    commands::eval_link(
        task,
        commands::EvalArgs {
            prepared: &o.prepared,
            checkpoint: &o.checkpoint,
            split: o.split,
            ties: o.ties.into(),
            out: &o.out,
        },
    )
}

fn main() -> ExitCode {
    let command_line = std::env::args().collect::<Vec<_>>().join(" ");
    let cli = Cli::parse();
    init_logging(cli.verbose, cli.quiet);
    match run(cli, command_line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
