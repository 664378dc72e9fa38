use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dupscan",
    version,
    about = "Near-duplicate campaign detection pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output directory; stage inputs default to files written here by
    /// earlier stages.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    /// Worker threads (default: machine parallelism); 1 runs sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, merge and filter posts and accounts.
    Ingest(IngestArgs),
    /// Embed filtered posts (local hashed n-grams or an external service).
    Embed(EmbedArgs),
    /// Density-cluster embedded posts.
    Cluster(ClusterArgs),
    /// Score clusterings over a range of eps against ground truth.
    Sweep(SweepArgs),
    /// Windowed string-similarity duplicate detection.
    Ropm(RopmArgs),
    /// Build the account co-duplication graph.
    Graph(GraphArgs),
    /// Detect and profile communities in the co-duplication graph.
    Communities(CommunitiesArgs),
    /// Classify accounts and surface keyword clusters.
    Screen(ScreenArgs),
    /// Score one representative post per cluster for toxicity.
    Toxicity(ToxicityArgs),
    /// Flag posts linking to listed domains.
    Specious(SpeciousArgs),
    /// Daily counts of posts linking to listed domains.
    Timeline(TimelineArgs),
    /// Generate a synthetic corpus with ground truth.
    Synth(SynthArgs),
    /// Score clusters against ground truth.
    Evaluate(EvaluateArgs),
    /// Assemble the consolidated report from stage outputs.
    Report,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Posts as JSONL, or CSV when the extension is `.csv`.
    #[arg(long)]
    pub posts: PathBuf,
    /// Account CSV `id,handle,verified,cap,rbs,party`.
    #[arg(long)]
    pub accounts: Option<PathBuf>,
    /// Bot scores `account_id,cap,rbs`, overriding the account file.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Party labels `account_id,party`, overriding the account file.
    #[arg(long)]
    pub parties: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "en,hi")]
    pub langs: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub min_unique_words: usize,
    #[arg(long)]
    pub keep_retweets: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long, default_value_t = 384, value_parser = clap::value_parser!(u64).range(8..))]
    pub dim: u64,
    /// Embedding service URL; the local embedder is used when absent.
    #[arg(long)]
    pub embed_endpoint: Option<String>,
    #[arg(long, env = "EMBED_API_KEY", hide_env_values = true)]
    pub embed_api_key: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 2)]
    pub min_pts: usize,
    /// Size threshold for the large-cluster count.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// `lo:hi:step` or a comma list.
    #[arg(long, default_value = "0.1:2.0:0.1")]
    pub eps: String,
    #[arg(long, default_value_t = 2)]
    pub min_pts: usize,
    /// Ground truth JSONL; defaults to the synthetic corpus truth.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RopmArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    /// One or more comparison windows.
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    pub window: Vec<usize>,
    #[arg(long, default_value_t = 0.9)]
    pub sim_threshold: f64,
    /// Compare raw rather than normalized text.
    #[arg(long)]
    pub raw_text: bool,
    /// Clusters to compare against; defaults to the cluster stage output
    /// when present.
    #[arg(long)]
    pub clusters: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PairModeArg {
    /// Clusters both accounts appear in.
    Clusters,
    /// Cross-account post pairs within clusters.
    Pairs,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub min_shared: u64,
    #[arg(long, value_enum, default_value_t = PairModeArg::Clusters)]
    pub pair_mode: PairModeArg,
}

#[derive(Debug, Args)]
pub struct CommunitiesArgs {
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub accounts: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub min_size: usize,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[arg(long)]
    pub accounts: Option<PathBuf>,
    #[arg(long, default_value_t = 0.9)]
    pub cap_min: f64,
    #[arg(long, default_value_t = 0.9)]
    pub rbs_min: f64,
    /// Keyword list; enables the keyword surface over clusters.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub top_k: usize,
    /// Match keywords only at word boundaries.
    #[arg(long)]
    pub word_boundary: bool,
}

#[derive(Debug, Args)]
pub struct ToxicityArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long)]
    pub accounts: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub tox_threshold: f64,
    /// Lexicon CSV `term,dimension,weight` replacing the built-in one.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Scoring service URL; the lexicon scorer is used when absent.
    #[arg(long)]
    pub tox_endpoint: Option<String>,
    #[arg(long, env = "TOX_API_KEY", hide_env_values = true)]
    pub tox_api_key: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub max_in_flight: usize,
    /// Request rate cap; 0 disables it.
    #[arg(long, default_value_t = 1.0)]
    pub rate_limit: f64,
}

#[derive(Debug, Args)]
pub struct SpeciousArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub domains: PathBuf,
    #[arg(long)]
    pub accounts: Option<PathBuf>,
    #[arg(long)]
    pub clusters: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TimelineArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub domains: PathBuf,
    /// First day (UTC); defaults to the earliest post.
    #[arg(long)]
    pub from: Option<chrono::NaiveDate>,
    /// Last day, inclusive; defaults to the latest post.
    #[arg(long)]
    pub to: Option<chrono::NaiveDate>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON generator config; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_accounts: Option<usize>,
    #[arg(long)]
    pub n_campaigns: Option<usize>,
    #[arg(long)]
    pub campaign_size_mean: Option<f64>,
    #[arg(long)]
    pub noise_posts: Option<usize>,
    #[arg(long)]
    pub mutation_rate: Option<f64>,
    /// Keyword list to plant; defaults to the bundled sample.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub posts: Option<PathBuf>,
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}
