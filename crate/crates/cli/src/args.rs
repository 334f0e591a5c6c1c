use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "embias", version, about = "Train, debias and audit static word embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mask frequent given names and merge gendered pairs in a corpus.
    Prep(PrepArgs),
    /// Train CBOW embeddings, optionally with the gender-encoding head.
    Train(TrainArgs),
    /// Apply neutralize and equalize along the gender direction.
    Debias(DebiasArgs),
    /// Mean k-means accuracy of recovering stereotype labels of professions.
    EvalCluster(ClusterArgs),
    /// Fraction of SemBias instances answered with each pair type.
    EvalSembias(SemBiasArgs),
    /// WEAT effect size and permutation p-value.
    EvalWeat(WeatArgs),
    /// Nearest neighbors with their projection on the gender direction.
    EvalNeighbors(NeighborArgs),
    /// Share of gender-biased words among nearest neighbors.
    EvalProximity(ProximityArgs),
    /// Two-dimensional PCA coordinates for a word list.
    ExportProjection(ProjectionArgs),
}

#[derive(Debug, Args)]
pub struct PrepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Names file to mask, one name per line.
    #[arg(long, conflicts_with = "ssa_dir")]
    pub mask_names: Option<PathBuf>,
    /// Directory of yobYYYY.txt files to derive the name set from.
    #[arg(long)]
    pub ssa_dir: Option<PathBuf>,
    /// Keep names whose total count is strictly above this.
    #[arg(long, default_value_t = 10_000, requires = "ssa_dir")]
    pub name_threshold: u64,
    /// Where to save the derived name set.
    #[arg(long, requires = "ssa_dir")]
    pub names_out: Option<PathBuf>,
    /// Gendered pairs never treated as names.
    #[arg(long)]
    pub gender_pairs: Option<PathBuf>,
    /// Professions never treated as names.
    #[arg(long)]
    pub professions: Option<PathBuf>,
    /// Extra words never treated as names.
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
    #[arg(long, default_value = embias::corpus::DEFAULT_MASK_TOKEN)]
    pub mask_token: String,
    /// Pair lexicon whose pairs are merged into single tokens.
    #[arg(long)]
    pub merge: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub tokens_per_line: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Flat TOML file with training keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Pair lexicon labeling male and female tokens for the gender head.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<i64>,
    #[arg(long)]
    pub window: Option<i64>,
    #[arg(long)]
    pub epochs: Option<i64>,
    #[arg(long)]
    pub batch: Option<i64>,
    #[arg(long)]
    pub negatives: Option<i64>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long = "subsample")]
    pub subsample_t: Option<f64>,
    #[arg(long)]
    pub min_count: Option<i64>,
    #[arg(long)]
    pub ege: bool,
    #[arg(long)]
    pub ege_lambda: Option<f64>,
    #[arg(long)]
    pub ege_class_weighting: bool,
    #[arg(long)]
    pub seed: Option<i64>,
    /// More than one thread trades bit-exact reproducibility for speed.
    #[arg(long)]
    pub threads: Option<i64>,
}

#[derive(Debug, Args)]
pub struct DebiasArgs {
    #[arg(long)]
    pub emb: PathBuf,
    /// Definitional pairs spanning the gender direction.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Pairs to equalize; defaults to the definitional pairs.
    #[arg(long)]
    pub equalize: Option<PathBuf>,
    /// Extra words left untouched by neutralize.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub emb: PathBuf,
    #[arg(long)]
    pub professions: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub runs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-run accuracies as CSV.
    #[arg(long)]
    pub runs_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SemBiasArgs {
    #[arg(long)]
    pub emb: PathBuf,
    #[arg(long)]
    pub sembias: PathBuf,
    #[arg(long, default_value = "he")]
    pub he: String,
    #[arg(long, default_value = "she")]
    pub she: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeatMode {
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct WeatArgs {
    #[arg(long)]
    pub emb: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = WeatMode::Auto)]
    pub mode: WeatMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WordsArgs {
    /// Query word; repeatable.
    #[arg(long = "word")]
    pub words: Vec<String>,
    /// File of query words, one per line.
    #[arg(long)]
    pub words_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NeighborArgs {
    #[arg(long)]
    pub emb: PathBuf,
    /// Definitional pairs spanning the gender direction.
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub query: WordsArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProximityArgs {
    #[arg(long)]
    pub emb: PathBuf,
    #[arg(long)]
    pub pairs: PathBuf,
    #[command(flatten)]
    pub query: WordsArgs,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    #[arg(long, default_value_t = 0.2)]
    pub tau: f64,
    /// Count a neighbor by its indirect bias with the query instead.
    #[arg(long)]
    pub indirect: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectionArgs {
    #[arg(long)]
    pub emb: PathBuf,
    /// Professions to project; their stereotype becomes the label.
    #[arg(long, required_unless_present = "words_file")]
    pub professions: Option<PathBuf>,
    /// Unlabeled words to project instead.
    #[arg(long, conflicts_with = "professions")]
    pub words_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
