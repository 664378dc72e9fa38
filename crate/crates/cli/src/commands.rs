use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use dupscan::corpus::{
    filter_posts, load_accounts, load_bot_scores, load_domain_list, load_keywords,
    load_party_labels, load_posts, write_accounts_csv, write_posts_jsonl, Account,
    AccountCollection, FilterConfig, PostCollection, PostFormat,
};
use dupscan::dupcluster::{
    cluster_stats, consistency, dbscan, eps_sweep, parse_eps_range, read_clusters_csv,
    write_clusters_csv, ClusterParams, ClusterSet, ConsistencyConfig,
};
use dupscan::dupgraph::{
    build_pairs, community_profile, louvain, read_edge_list_csv, threshold_graph,
    write_edge_list_csv, write_layout_csv, write_pairs_csv, PairMode,
};
use dupscan::embed::{
    embed_posts, fetch_embeddings, load_embeddings, write_embeddings, EmbeddingService, HashedNgram,
};
use dupscan::ropm::{ropm_scan, DupSummary, RopmParams};
use dupscan::screening::{
    account_summary, keyword_surface, match_specious, score_toxicity, specious_timeline,
    BotThresholds, KeywordMatch, LexiconScorer, PerspectiveClient, ToxicityScorer,
};
use dupscan::synth::{evaluate, generate, write_corpus, GroundTruth, SynthConfig};
use dupscan::Execution;

use crate::args::*;
use crate::progress;

pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<dupscan::Error> for CliError {
    fn from(e: dupscan::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

/// File names of stage outputs inside the output directory.
pub mod files {
    pub const POSTS: &str = "posts.jsonl";
    pub const ACCOUNTS: &str = "accounts.csv";
    pub const INGEST: &str = "ingest.json";
    pub const EMBEDDINGS: &str = "embeddings.jsonl";
    pub const EMBED: &str = "embed.json";
    pub const CLUSTERS: &str = "clusters.csv";
    pub const STATS: &str = "stats.json";
    pub const SWEEP: &str = "sweep.json";
    pub const ROPM: &str = "ropm.json";
    pub const PAIRS: &str = "pairs.csv";
    pub const EDGES: &str = "edges.csv";
    pub const GRAPH: &str = "graph.json";
    pub const PARTITION: &str = "partition.csv";
    pub const COMMUNITIES: &str = "communities.json";
    pub const LAYOUT: &str = "layout.csv";
    pub const SCREEN: &str = "screen.json";
    pub const KEYWORDS: &str = "keywords.json";
    pub const TOXICITY: &str = "toxicity.json";
    pub const TOXICITY_TABLE: &str = "toxicity_table.csv";
    pub const SPECIOUS: &str = "specious.json";
    pub const SPECIOUS_POSTS: &str = "specious_posts.txt";
    pub const TIMELINE: &str = "timeline.json";
    pub const TIMELINE_CSV: &str = "timeline.csv";
    pub const SYNTH_DIR: &str = "synth";
    pub const SYNTH_TRUTH: &str = "synth_truth.json";
    pub const EVALUATION: &str = "evaluation.json";
    pub const REPORT_JSON: &str = "report.json";
    pub const REPORT_TXT: &str = "report.txt";
}

pub struct Ctx {
    pub out: PathBuf,
    pub seed: u64,
    pub exec: Execution,
}

impl Ctx {
    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// The explicit path, or the named file in the output directory; must exist.
    fn input(&self, explicit: &Option<PathBuf>, default: &str) -> CliResult<PathBuf> {
        let p = explicit.clone().unwrap_or_else(|| self.path(default));
        require(&p)?;
        Ok(p)
    }

    fn posts(&self, explicit: &Option<PathBuf>) -> CliResult<PostCollection> {
        let p = self.input(explicit, files::POSTS)?;
        let (posts, stats) = load_posts(&p, PostFormat::from_path(&p))?;
        if stats.skipped > 0 {
            progress::event(
                "load",
                json!({"file": p.display().to_string(), "skipped": stats.skipped}),
            );
        }
        Ok(posts)
    }

    fn accounts(&self, explicit: &Option<PathBuf>) -> CliResult<AccountCollection> {
        let p = self.input(explicit, files::ACCOUNTS)?;
        Ok(load_accounts(&p)?.0)
    }

    fn clusters(
        &self,
        explicit: &Option<PathBuf>,
        posts: &PostCollection,
    ) -> CliResult<ClusterSet> {
        let p = self.input(explicit, files::CLUSTERS)?;
        Ok(read_clusters_csv(&p, posts)?)
    }
}

pub fn require(p: &Path) -> CliResult<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(anyhow::anyhow!(
            "input not found: {}",
            p.display()
        )))
    }
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(anyhow::Error::from)?;
    s.push('\n');
    fs::write(path, s).map_err(|e| dupscan::Error::io(path, e))?;
    Ok(())
}

fn write_lines<'a>(path: &Path, lines: impl IntoIterator<Item = &'a str>) -> CliResult<()> {
    let mut w =
        std::io::BufWriter::new(fs::File::create(path).map_err(|e| dupscan::Error::io(path, e))?);
    for l in lines {
        writeln!(w, "{l}").map_err(|e| dupscan::Error::io(path, e))?;
    }
    w.flush().map_err(|e| dupscan::Error::io(path, e))?;
    Ok(())
}

pub fn ingest(ctx: &Ctx, a: &IngestArgs) -> CliResult<Value> {
    require(&a.posts)?;
    let (posts, load) = load_posts(&a.posts, PostFormat::from_path(&a.posts))?;
    let mut accounts = match &a.accounts {
        Some(p) => {
            require(p)?;
            load_accounts(p)?.0
        }
        None => AccountCollection::default(),
    };
    let unknown_scores = match &a.scores {
        Some(p) => {
            require(p)?;
            accounts.apply_bot_scores(&load_bot_scores(p)?)
        }
        None => 0,
    };
    let unknown_parties = match &a.parties {
        Some(p) => {
            require(p)?;
            accounts.apply_party_labels(&load_party_labels(p)?)
        }
        None => 0,
    };
    // Posting accounts absent from the account file get bare records.
    let mut added = 0;
    let posting: BTreeSet<&str> = posts.iter().map(|p| p.account_id.as_str()).collect();
    for id in posting {
        if accounts.insert(Account::new(id)) {
            added += 1;
        }
    }
    let cfg = FilterConfig {
        allowed_langs: a
            .langs
            .iter()
            .map(|l| l.trim().to_ascii_lowercase())
            .collect(),
        min_unique_words: a.min_unique_words,
        drop_retweets: !a.keep_retweets,
    };
    let (kept, filter) = filter_posts(&posts, &cfg);
    write_posts_jsonl(&ctx.path(files::POSTS), kept.iter())?;
    let mut sorted: Vec<&Account> = accounts.iter().collect();
    sorted.sort_by(|x, y| x.id.cmp(&y.id));
    write_accounts_csv(&ctx.path(files::ACCOUNTS), sorted)?;
    let report = json!({
        "load": load,
        "filter": filter,
        "n_accounts": accounts.len(),
        "accounts_added_from_posts": added,
        "scores_for_unknown_accounts": unknown_scores,
        "parties_for_unknown_accounts": unknown_parties,
    });
    write_json(&ctx.path(files::INGEST), &report)?;
    Ok(
        json!({"posts_in": load.loaded, "posts_kept": filter.retained, "accounts": accounts.len(),
        "outputs": [files::POSTS, files::ACCOUNTS, files::INGEST]}),
    )
}

pub fn embed(ctx: &Ctx, a: &EmbedArgs) -> CliResult<Value> {
    let posts = ctx.posts(&a.posts)?;
    let (set, unembeddable, backend) = match &a.embed_endpoint {
        Some(url) => {
            let svc = EmbeddingService::new(url.clone(), a.embed_api_key.clone());
            let partial = ctx.path("embeddings.partial.jsonl");
            let (set, stats) =
                fetch_embeddings(posts.as_slice(), &svc, a.batch_size, Some(&partial))?;
            (set, stats.unembeddable, "service")
        }
        None => {
            let e = HashedNgram::new(a.dim as usize, HashedNgram::DEFAULT_RANGE, ctx.seed)
                .map_err(usage)?;
            let out = embed_posts(posts.as_slice(), &e, ctx.exec)?;
            (out.set, out.unembeddable, "hashed_ngram")
        }
    };
    write_embeddings(&ctx.path(files::EMBEDDINGS), &set)?;
    let report = json!({
        "backend": backend,
        "dim": set.dim(),
        "n_embedded": set.len(),
        "unembeddable": unembeddable,
    });
    write_json(&ctx.path(files::EMBED), &report)?;
    Ok(
        json!({"embedded": set.len(), "unembeddable": unembeddable.len(), "dim": set.dim(),
        "outputs": [files::EMBEDDINGS, files::EMBED]}),
    )
}

pub fn cluster(ctx: &Ctx, a: &ClusterArgs) -> CliResult<Value> {
    let params = ClusterParams::new(a.eps, a.min_pts).map_err(usage)?;
    let posts = ctx.posts(&a.posts)?;
    let emb = ctx.input(&a.embeddings, files::EMBEDDINGS)?;
    let (set, _) = load_embeddings(&emb)?;
    progress::event(
        "cluster",
        json!({"points": set.len(), "eps": a.eps, "min_pts": a.min_pts}),
    );
    let clusters = dbscan(&set, &params, &posts, ctx.exec)?;
    write_clusters_csv(&ctx.path(files::CLUSTERS), &clusters)?;
    let accounts = posts.account_map();
    let stats = cluster_stats(&clusters, a.k, Some(&accounts))?;
    let cons = consistency(
        &clusters,
        &set,
        &ConsistencyConfig {
            seed: ctx.seed,
            ..Default::default()
        },
        ctx.exec,
    )?;
    let report = json!({"params": params, "stats": stats, "consistency": cons});
    write_json(&ctx.path(files::STATS), &report)?;
    Ok(
        json!({"clusters": stats.n_clusters, "clustered_posts": stats.total_clustered_posts,
        "noise": stats.n_noise, "outputs": [files::CLUSTERS, files::STATS]}),
    )
}

pub fn sweep(ctx: &Ctx, a: &SweepArgs) -> CliResult<Value> {
    let eps = parse_eps_range(&a.eps).map_err(usage)?;
    if a.min_pts < 2 {
        return Err(usage("min_pts must be >= 2"));
    }
    let emb = ctx.input(&a.embeddings, files::EMBEDDINGS)?;
    let truth_path = ctx.input(&a.truth, &format!("{}/truth.jsonl", files::SYNTH_DIR))?;
    let (set, _) = load_embeddings(&emb)?;
    let truth = GroundTruth::read_jsonl(&truth_path)?;
    let report = eps_sweep(&set, &truth.post_campaign, &eps, a.min_pts, ctx.exec)?;
    write_json(&ctx.path(files::SWEEP), &report)?;
    let best = report.best().cloned();
    Ok(
        json!({"rows": report.rows.len(), "best_eps": best.as_ref().map(|b| b.eps),
        "best_ari": best.as_ref().map(|b| b.ari), "outputs": [files::SWEEP]}),
    )
}

#[derive(Serialize)]
struct DetectorRow {
    detector: String,
    #[serde(flatten)]
    summary: DupSummary,
}

pub fn ropm(ctx: &Ctx, a: &RopmArgs) -> CliResult<Value> {
    if a.window.is_empty() {
        return Err(usage("at least one window is needed"));
    }
    let mut params = Vec::new();
    for &w in &a.window {
        let mut p = RopmParams::new(w, a.sim_threshold).map_err(usage)?;
        p.normalize = !a.raw_text;
        params.push(p);
    }
    let posts = ctx.posts(&a.posts)?;
    let accounts = posts.account_map();
    let mut rows = Vec::new();
    for p in &params {
        progress::event("ropm", json!({"window": p.window}));
        let found = ropm_scan(&posts, p, ctx.exec);
        rows.push(DetectorRow {
            detector: format!("ropm-{}", p.window),
            summary: found.summary(&accounts),
        });
    }
    let clusters_path = a
        .clusters
        .clone()
        .unwrap_or_else(|| ctx.path(files::CLUSTERS));
    if a.clusters.is_some() || clusters_path.is_file() {
        require(&clusters_path)?;
        let clusters = read_clusters_csv(&clusters_path, &posts)?;
        rows.push(DetectorRow {
            detector: "clustering".into(),
            summary: DupSummary::from_clusters(&clusters, &accounts)?,
        });
    }
    let report = json!({"sim_threshold": a.sim_threshold, "normalized": !a.raw_text, "rows": rows});
    write_json(&ctx.path(files::ROPM), &report)?;
    Ok(json!({"rows": rows, "outputs": [files::ROPM]}))
}

pub fn graph(ctx: &Ctx, a: &GraphArgs) -> CliResult<Value> {
    let posts = ctx.posts(&a.posts)?;
    let clusters = ctx.clusters(&a.clusters, &posts)?;
    let mode = match a.pair_mode {
        PairModeArg::Clusters => PairMode::SharedClusters,
        PairModeArg::Pairs => PairMode::SharedPostPairs,
    };
    let pairs = build_pairs(&clusters, &posts.account_map(), mode, ctx.exec)?;
    let t = threshold_graph(&pairs, a.min_shared);
    write_pairs_csv(&ctx.path(files::PAIRS), &pairs)?;
    write_edge_list_csv(&ctx.path(files::EDGES), &t.graph)?;
    let report = json!({
        "pair_mode": format!("{mode:?}"),
        "min_shared": a.min_shared,
        "n_pairs": pairs.weights.len(),
        "total_pair_weight": pairs.total_weight(),
        "n_nodes": t.graph.n_nodes(),
        "n_edges": t.graph.n_edges(),
        "n_super_duplicators": t.super_duplicators.len(),
        "super_duplicators": t.super_duplicators,
    });
    write_json(&ctx.path(files::GRAPH), &report)?;
    Ok(
        json!({"pairs": pairs.weights.len(), "nodes": t.graph.n_nodes(), "edges": t.graph.n_edges(),
        "outputs": [files::PAIRS, files::EDGES, files::GRAPH]}),
    )
}

pub fn communities(ctx: &Ctx, a: &CommunitiesArgs) -> CliResult<Value> {
    let edges = ctx.input(&a.edges, files::EDGES)?;
    let graph = read_edge_list_csv(&edges)?;
    let accounts = ctx.accounts(&a.accounts)?;
    let partition = louvain(&graph, ctx.seed);
    let profile = community_profile(&graph, &partition, &accounts, a.min_size)?;
    partition.write_csv(&ctx.path(files::PARTITION))?;
    write_layout_csv(&ctx.path(files::LAYOUT), &graph, &partition, &accounts)?;
    let report = json!({"seed": ctx.seed, "q_history": partition.q_history, "profile": profile});
    write_json(&ctx.path(files::COMMUNITIES), &report)?;
    Ok(
        json!({"q": profile.q, "communities": profile.n_communities, "profiled": profile.n_profiled,
        "outputs": [files::PARTITION, files::LAYOUT, files::COMMUNITIES]}),
    )
}

pub fn screen(ctx: &Ctx, a: &ScreenArgs) -> CliResult<Value> {
    let t = BotThresholds::new(a.cap_min, a.rbs_min).map_err(usage)?;
    let accounts = ctx.accounts(&a.accounts)?;
    let summary = account_summary(&accounts, &t);
    write_json(
        &ctx.path(files::SCREEN),
        &json!({"thresholds": t, "summary": summary}),
    )?;
    let mut outputs = vec![files::SCREEN];
    let mut out = json!({"accounts": summary.n_accounts, "bots": summary.n_bot});
    if let Some(kw) = &a.keywords {
        require(kw)?;
        let keywords = load_keywords(kw)?;
        let posts = ctx.posts(&a.posts)?;
        let clusters = ctx.clusters(&a.clusters, &posts)?;
        let mode = if a.word_boundary {
            KeywordMatch::WordBoundary
        } else {
            KeywordMatch::Substring
        };
        let report = keyword_surface(&clusters, &posts, &keywords, a.top_k, mode).map_err(usage)?;
        write_json(&ctx.path(files::KEYWORDS), &report)?;
        outputs.push(files::KEYWORDS);
        out["keyword_tweets"] = json!(report.n_tweets_any);
        out["keyword_clusters"] = json!(report.n_clusters_any);
    }
    out["outputs"] = json!(outputs);
    Ok(out)
}

pub fn toxicity(ctx: &Ctx, a: &ToxicityArgs) -> CliResult<Value> {
    if !(0.0..=1.0).contains(&a.tox_threshold) {
        return Err(usage(format!(
            "tox threshold must be in [0, 1], got {}",
            a.tox_threshold
        )));
    }
    let posts = ctx.posts(&a.posts)?;
    let clusters = ctx.clusters(&a.clusters, &posts)?;
    let accounts = ctx.accounts(&a.accounts)?;
    let scorer: Box<dyn ToxicityScorer> = match (&a.tox_endpoint, &a.lexicon) {
        (Some(url), _) => Box::new(
            PerspectiveClient::new(url.clone(), a.tox_api_key.clone())
                .with_max_in_flight(a.max_in_flight)
                .with_rate_limit(a.rate_limit),
        ),
        (None, Some(p)) => {
            require(p)?;
            Box::new(LexiconScorer::from_path(p)?)
        }
        (None, None) => Box::new(LexiconScorer::builtin()),
    };
    let report = score_toxicity(
        &clusters,
        &posts,
        &accounts,
        scorer.as_ref(),
        ctx.seed,
        a.tox_threshold,
    )?;
    report.write_table_csv(&ctx.path(files::TOXICITY_TABLE))?;
    write_json(&ctx.path(files::TOXICITY), &report)?;
    Ok(
        json!({"clusters": report.n_clusters, "scored": report.n_scored, "toxic": report.n_toxic,
        "outputs": [files::TOXICITY, files::TOXICITY_TABLE]}),
    )
}

fn domains(p: &Path) -> CliResult<BTreeSet<String>> {
    require(p)?;
    Ok(load_domain_list(p)?)
}

pub fn specious(ctx: &Ctx, a: &SpeciousArgs) -> CliResult<Value> {
    let list = domains(&a.domains)?;
    let posts = ctx.posts(&a.posts)?;
    let accounts = ctx.accounts(&a.accounts)?;
    let clusters_path = a
        .clusters
        .clone()
        .unwrap_or_else(|| ctx.path(files::CLUSTERS));
    let clusters = if a.clusters.is_some() || clusters_path.is_file() {
        require(&clusters_path)?;
        Some(read_clusters_csv(&clusters_path, &posts)?)
    } else {
        None
    };
    let m = match_specious(&posts, clusters.as_ref(), &list, &accounts);
    write_json(&ctx.path(files::SPECIOUS), &m.report)?;
    write_lines(
        &ctx.path(files::SPECIOUS_POSTS),
        m.flagged.iter().map(String::as_str),
    )?;
    Ok(
        json!({"flagged_tweets": m.report.n_flagged_tweets, "flagged_accounts": m.report.n_flagged_accounts,
        "outputs": [files::SPECIOUS, files::SPECIOUS_POSTS]}),
    )
}

pub fn timeline(ctx: &Ctx, a: &TimelineArgs) -> CliResult<Value> {
    let list = domains(&a.domains)?;
    let posts = ctx.posts(&a.posts)?;
    let dates: Vec<_> = posts.iter().map(|p| p.timestamp.date_naive()).collect();
    let from = a.from.or_else(|| dates.iter().min().copied());
    let to = a.to.or_else(|| dates.iter().max().copied());
    let (Some(from), Some(to)) = (from, to) else {
        return Err(usage(
            "no posts to infer the date range from; pass --from and --to",
        ));
    };
    let m = match_specious(&posts, None, &list, &AccountCollection::default());
    let flagged: Vec<_> = m.flagged.iter().filter_map(|id| posts.get(id)).collect();
    let t = specious_timeline(flagged, from, to).map_err(usage)?;
    t.write_csv(&ctx.path(files::TIMELINE_CSV))?;
    write_json(&ctx.path(files::TIMELINE), &t)?;
    Ok(
        json!({"days": t.n_days, "total": t.total, "outputs": [files::TIMELINE, files::TIMELINE_CSV]}),
    )
}

pub fn synth(ctx: &Ctx, a: &SynthArgs) -> CliResult<Value> {
    let mut cfg: SynthConfig = match &a.config {
        Some(p) => {
            require(p)?;
            let text = fs::read_to_string(p).map_err(|e| dupscan::Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| dupscan::Error::format(p, e.to_string()))?
        }
        None => SynthConfig::default(),
    };
    cfg.seed = ctx.seed;
    if let Some(v) = a.n_accounts {
        cfg.n_accounts = v;
    }
    if let Some(v) = a.n_campaigns {
        cfg.n_campaigns = v;
    }
    if let Some(v) = a.campaign_size_mean {
        cfg.campaign_size_mean = v;
    }
    if let Some(v) = a.noise_posts {
        cfg.noise_posts = v;
    }
    if let Some(v) = a.mutation_rate {
        cfg.mutation_rate = v;
    }
    if let Some(p) = &a.keywords {
        require(p)?;
        cfg.keywords = load_keywords(p)?;
    }
    cfg.validate().map_err(usage)?;
    let corpus = generate(&cfg)?;
    let dir = ctx.path(files::SYNTH_DIR);
    write_corpus(&dir, &corpus)?;
    let truth = json!({"config": cfg, "truth": corpus.truth});
    write_json(&dir.join(files::SYNTH_TRUTH), &truth)?;
    let planted = corpus
        .truth
        .post_campaign
        .values()
        .filter(|c| c.is_some())
        .count();
    Ok(
        json!({"posts": corpus.posts.len(), "accounts": corpus.accounts.len(), "campaigns": corpus.truth.campaigns.len(),
        "planted_posts": planted, "outputs": ["synth/posts.jsonl", "synth/accounts.csv", "synth/domains.txt",
        "synth/keywords.txt", "synth/truth.jsonl", "synth/synth_truth.json"]}),
    )
}

pub fn evaluate_cmd(ctx: &Ctx, a: &EvaluateArgs) -> CliResult<Value> {
    let posts = ctx.posts(&a.posts)?;
    let clusters = ctx.clusters(&a.clusters, &posts)?;
    let truth_path = ctx.input(&a.truth, &format!("{}/truth.jsonl", files::SYNTH_DIR))?;
    let truth = GroundTruth::read_jsonl(&truth_path)?;
    let r = evaluate(&clusters, &truth)?;
    write_json(&ctx.path(files::EVALUATION), &r)?;
    Ok(
        json!({"ari": r.ari, "precision": r.precision, "recall": r.recall, "n_correct": r.n_correct,
        "outputs": [files::EVALUATION]}),
    )
}
