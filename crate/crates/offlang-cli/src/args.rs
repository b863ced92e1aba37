//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "offlang",
    version,
    about = "Hierarchical offensive-language classification pipeline: preprocessing, \
             contrastive pair construction, training, evaluation, ensembling, projection"
)]
pub struct Cli {
    /// Seed applied to any seeded step unless the command overrides it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    A,
    B,
    C,
}

impl TaskArg {
    pub fn to_task(self) -> offlang_core::Task {
        match self {
            TaskArg::A => offlang_core::Task::A,
            TaskArg::B => offlang_core::Task::B,
            TaskArg::C => offlang_core::Task::C,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Ce,
    Contrastive,
    #[value(name = "online-contrastive")]
    OnlineContrastive,
    #[value(name = "batch-all")]
    BatchAll,
    Multitask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SizePreset {
    #[value(name = "50k")]
    Fifty,
    #[value(name = "250k")]
    TwoFifty,
    #[value(name = "1m")]
    Million,
}

impl SizePreset {
    pub fn pairs(self) -> u64 {
        match self {
            SizePreset::Fifty => 50_000,
            SizePreset::TwoFifty => 250_000,
            SizePreset::Million => 1_000_000,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize the text column of a corpus.
    Preprocess(PreprocessArgs),
    /// Per-label counts and fractions for one task.
    Stats(StatsArgs),
    /// Report label-hierarchy violations.
    Validate(ValidateArgs),
    /// Build a class-balanced corpus by undersampling.
    Balance(BalanceArgs),
    /// Build contrastive pair pools and sample a balanced pair file.
    Pairs(PairsArgs),
    /// Train a model (classification, contrastive, frozen probe, multitask).
    Train(TrainArgs),
    /// Evaluate a checkpoint on a labeled corpus.
    Eval(EvalArgs),
    /// Majority-class baseline metrics.
    Baseline(BaselineArgs),
    /// Logit-sum ensemble evaluation over several checkpoints.
    Ensemble(EnsembleArgs),
    /// 2-D PCA projection of corpus embeddings.
    Project(ProjectArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated stage list; defaults to the full pipeline.
    #[arg(long)]
    pub stages: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub max_run: usize,
    /// Input file has no header row.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Additional corpora whose records join the sampling pool.
    #[arg(long = "extra")]
    pub extras: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// Label whose records are all kept (e.g. OFF or HS).
    #[arg(long)]
    pub positive: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, conflicts_with = "size_preset")]
    pub size: Option<u64>,
    #[arg(long, value_enum)]
    pub size_preset: Option<SizePreset>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Defaults to ce (or the config file's objective).
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Labeled training corpus (ce, batch-all, multitask, probe).
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Pair file (contrastive, online-contrastive).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Train only the task head on a frozen encoder checkpoint.
    #[arg(long)]
    pub probe: bool,
    /// Encoder checkpoint for --probe.
    #[arg(long)]
    pub encoder: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch history as JSON lines.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Training config file (key = value).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Encoder config file (key = value).
    #[arg(long)]
    pub encoder_config: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long = "eval")]
    pub eval_set: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    /// Member checkpoint; repeatable.
    #[arg(long = "model", required = true)]
    pub models: Vec<PathBuf>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "a")]
    pub task: TaskArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub components: usize,
    #[arg(long)]
    pub no_header: bool,
}
