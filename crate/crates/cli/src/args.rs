use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Surface realization from shuffled, lemmatized Universal Dependencies
/// trees.
#[derive(Debug, Parser)]
#[command(name = "ud-realize", version)]
pub struct Cli {
    /// Log progress (repeat for per-sentence detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a Witten-Bell n-gram model; writes an ARPA file and a vocabulary.
    TrainLm(TrainLmArgs),
    /// Train the character-level reinflection network.
    TrainReinflector(TrainReinflectorArgs),
    /// Reinflect and order every sentence of a CoNLL-U file.
    Realize(RealizeArgs),
    /// Score predictions against references (BLEU, NIST, DIST).
    Evaluate(EvaluateArgs),
    /// Order word bags with the language model only.
    Reorder(ReorderArgs),
    /// Reinflect lemma/tag pairs with a trained network.
    Reinflect(ReinflectArgs),
}

#[derive(Debug, Args)]
pub struct TrainLmArgs {
    /// One sentence per line; for `id<TAB>sentence` lines only the sentence
    /// is used.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lm_out: PathBuf,
    #[arg(long)]
    pub vocab_out: PathBuf,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    /// Keep punctuation-only tokens (they are dropped by default, matching
    /// the word bags that are ordered).
    #[arg(long)]
    pub keep_punct: bool,
}

#[derive(Debug, Args)]
pub struct TrainReinflectorArgs {
    /// `lemma<TAB>TAG<TAB>form` lines.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(1..))]
    pub hidden: u32,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u32).range(1..))]
    pub embed: u32,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    pub epochs: u32,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    pub batch_size: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_len: u32,
}

/// Ordering settings. Unset flags fall back to the config file, then to the
/// built-in defaults.
#[derive(Debug, Args, Default)]
pub struct OrderArgs {
    /// Longest bag ordered with chunk schemes; longer bags use seed-and-extend.
    #[arg(long)]
    pub threshold: Option<usize>,
    /// Longest bag ordered by trying every permutation.
    #[arg(long)]
    pub exhaustive_limit: Option<usize>,
    /// Skip chunk schemes with more block arrangements than this.
    #[arg(long)]
    pub arrangement_cap: Option<usize>,
    #[arg(long)]
    pub no_full_stop: bool,
    #[arg(long)]
    pub no_capitalize: bool,
    /// Worker threads; output order never depends on this.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// TOML file with any of: threshold, exhaustive_limit, arrangement_cap,
    /// capitalize, append_full_stop, jobs.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RealizeArgs {
    #[arg(long)]
    pub conllu: PathBuf,
    /// ARPA language model.
    #[arg(long)]
    pub lm: PathBuf,
    /// Reinflection checkpoint; without it lemmas are used as forms.
    #[arg(long)]
    pub reinflector: Option<PathBuf>,
    /// Output file of `sent_id<TAB>sentence` lines.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub order: OrderArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Predictions, `id<TAB>sentence` per line.
    #[arg(long)]
    pub pred: PathBuf,
    /// References, `id<TAB>sentence` per line.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also print per-sentence scores.
    #[arg(long)]
    pub per_sentence: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Tsv,
}

#[derive(Debug, Args)]
pub struct ReorderArgs {
    /// Lines of whitespace-separated words, optionally `id<TAB>words`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub lm: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub order: OrderArgs,
}

#[derive(Debug, Args)]
pub struct ReinflectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `lemma<TAB>TAG` lines; a third column is taken as the gold form and
    /// accuracy is reported.
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
