//! `usagenet`: run the pipeline or any single stage of it.
//!
//! Every subcommand reads an optional TOML config (`--config`) and applies
//! its flags on top. Exit codes: 0 success, 1 configuration error, 2 stage
//! failure, 3 finished with skipped or failed metric specs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;
use usagenet::ingest::LogFormat;
use usagenet::pipeline::{artifacts, run_stages, MapNetwork, PipelineConfig, PipelineError, RunReport, Stage};
use usagenet::synth::{generate_corpus, SynthSpec};

#[derive(Parser)]
#[command(name = "usagenet", version, about = "Journal usage networks, impact metrics and science maps")]
struct Cli {
    /// Log stream on stderr.
    #[arg(long, value_enum, default_value_t = LogStyle::Text, global = true)]
    log: LogStyle,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogStyle {
    Text,
    Json,
    Off,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and anonymize the usage log; parse citation and article count files.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Group events into sessions, flag robots, conflate repeats.
    Sessionize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sessions: SessionArgs,
    },
    /// Resolve journal descriptions against the journal registry.
    Resolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        resolve: ResolveArgs,
    },
    /// Build the usage and citation networks.
    BuildNet {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        census: CensusArgs,
    },
    /// Compute the metric catalog.
    Metrics {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        metrics: MetricArgs,
        #[command(flatten)]
        census: CensusArgs,
    },
    /// Spearman correlation matrix of the metric rankings.
    Correlate {
        #[command(flatten)]
        common: Common,
    },
    /// Two-component PCA of the correlation matrix.
    Pca {
        #[command(flatten)]
        common: Common,
    },
    /// Prune, lay out and render a science map.
    Map {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Write a synthetic corpus with ground truth.
    Synth(SynthArgs),
    /// Run every stage.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ingest: IngestArgs,
        #[command(flatten)]
        sessions: SessionArgs,
        #[command(flatten)]
        resolve: ResolveArgs,
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        census: CensusArgs,
        #[command(flatten)]
        metrics: MetricArgs,
        #[command(flatten)]
        map: MapArgs,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip stages whose persisted artifacts match the current settings.
    #[arg(long)]
    resume: bool,
    /// Worker threads (all cores by default).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct IngestArgs {
    /// Usage log.
    #[arg(long)]
    usage: Option<PathBuf>,
    /// Usage log format.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Citation records; without them only usage metrics are computed.
    #[arg(long)]
    citations: Option<PathBuf>,
    /// Articles published per journal and year.
    #[arg(long)]
    article_counts: Option<PathBuf>,
    /// File holding the anonymization salt.
    #[arg(long)]
    salt_file: Option<PathBuf>,
    /// Environment variable holding the salt.
    #[arg(long)]
    salt_env: Option<String>,
}

#[derive(Args)]
struct SessionArgs {
    /// Inactivity timeout in seconds.
    #[arg(long)]
    session_timeout: Option<i64>,
    /// Sessions with more requests are robots.
    #[arg(long)]
    bot_max_length: Option<usize>,
    /// Median gap in seconds below which long sessions are robots.
    #[arg(long)]
    bot_min_gap: Option<f64>,
}

#[derive(Args)]
struct ResolveArgs {
    /// Canonical journal list.
    #[arg(long)]
    journal_registry: Option<PathBuf>,
    /// Known title and ISSN variants.
    #[arg(long)]
    equivalences: Option<PathBuf>,
    /// Fuzzy title similarity threshold.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct NetArgs {
    /// Sessions with more distinct journals are skipped.
    #[arg(long)]
    session_cap: Option<usize>,
    /// Weight pairs by the product of request counts.
    #[arg(long)]
    frequency_weighted: bool,
}

#[derive(Args)]
struct CensusArgs {
    /// Year whose citations are counted.
    #[arg(long)]
    census_year: Option<i32>,
    /// Comma-separated publication years.
    #[arg(long, value_delimiter = ',')]
    window: Option<Vec<i32>>,
}

#[derive(Args)]
struct MetricArgs {
    /// Metric registry file.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// PageRank damping factor.
    #[arg(long)]
    damping: Option<f64>,
    /// PageRank convergence tolerance (L1).
    #[arg(long)]
    tol: Option<f64>,
    /// PageRank iteration limit.
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NetworkArg {
    Usage,
    Citation,
}

#[derive(Args)]
struct MapArgs {
    /// Heaviest edges kept before the per-node cap.
    #[arg(long)]
    top_edges: Option<usize>,
    /// Strongest links each journal retains.
    #[arg(long)]
    node_cap: Option<usize>,
    /// Layout seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Layout iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Number of labelled nodes.
    #[arg(long)]
    labels: Option<usize>,
    /// Network drawn on the map.
    #[arg(long, value_enum)]
    network: Option<NetworkArg>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory to write the corpus into.
    #[arg(long)]
    out: PathBuf,
    /// TOML generator spec; flags override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Generator seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of planted journal communities.
    #[arg(long)]
    communities: Option<usize>,
    /// Journals in each community.
    #[arg(long)]
    journals_per_community: Option<usize>,
    /// Sessions to generate.
    #[arg(long)]
    sessions: Option<usize>,
    /// Chance that a human request leaves its home community.
    #[arg(long)]
    cross_community: Option<f64>,
    /// Share of sessions produced by robots.
    #[arg(long)]
    bot_fraction: Option<f64>,
    /// Also write `usagenet.toml` and a salt file for running the corpus.
    #[arg(long)]
    write_config: bool,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Common {
    fn load(&self) -> Result<PipelineConfig, PipelineError> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::from_file(p)?,
            None => PipelineConfig::default(),
        };
        set(&mut c.output_dir, self.out.clone());
        c.resume |= self.resume;
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        Ok(c)
    }
}

impl IngestArgs {
    fn apply(self, c: &mut PipelineConfig) {
        set(&mut c.usage_log, self.usage);
        set(
            &mut c.log_format,
            self.format.map(|f| match f {
                FormatArg::Csv => LogFormat::Delimited,
                FormatArg::Jsonl => LogFormat::JsonLines,
            }),
        );
        if self.citations.is_some() {
            c.citations = self.citations;
        }
        if self.article_counts.is_some() {
            c.article_counts = self.article_counts;
        }
        if self.salt_file.is_some() {
            c.salt_file = self.salt_file;
        }
        if self.salt_env.is_some() {
            c.salt_env = self.salt_env;
        }
    }
}

impl SessionArgs {
    fn apply(self, c: &mut PipelineConfig) {
        set(&mut c.session_timeout_secs, self.session_timeout);
        set(&mut c.bot_policy.max_length, self.bot_max_length);
        set(&mut c.bot_policy.min_median_gap, self.bot_min_gap);
    }
}

impl ResolveArgs {
    fn apply(self, c: &mut PipelineConfig) {
        set(&mut c.journal_registry, self.journal_registry);
        if self.equivalences.is_some() {
            c.equivalences = self.equivalences;
        }
        set(&mut c.dedup_threshold, self.threshold);
    }
}

impl NetArgs {
    fn apply(self, c: &mut PipelineConfig) {
        set(&mut c.usage_network.session_cap, self.session_cap);
        c.usage_network.frequency_weighted |= self.frequency_weighted;
    }
}

impl CensusArgs {
    fn apply(self, c: &mut PipelineConfig) {
        set(&mut c.census_year, self.census_year);
        if self.window.is_some() {
            c.window = self.window;
        }
    }
}

impl MetricArgs {
    fn apply(self, c: &mut PipelineConfig) {
        if self.registry.is_some() {
            c.metric_registry = self.registry;
        }
        set(&mut c.pagerank.damping, self.damping);
        set(&mut c.pagerank.tol, self.tol);
        set(&mut c.pagerank.max_iter, self.max_iter);
    }
}

impl MapArgs {
    fn apply(self, c: &mut PipelineConfig) {
        set(&mut c.prune.top_k_edges, self.top_edges);
        set(&mut c.prune.per_node_cap, self.node_cap);
        set(&mut c.layout.seed, self.seed);
        set(&mut c.layout.iterations, self.iterations);
        set(&mut c.style.labels, self.labels);
        set(
            &mut c.map_network,
            self.network.map(|n| match n {
                NetworkArg::Usage => MapNetwork::Usage,
                NetworkArg::Citation => MapNetwork::Citation,
            }),
        );
    }
}

enum Failure {
    Config(String),
    Stage(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Config(_) => Failure::Config(e.to_string()),
            PipelineError::Stage { .. } => Failure::Stage(e.to_string()),
        }
    }
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => SynthSpec::default(),
    };
    set(&mut spec.seed, args.seed);
    set(&mut spec.communities, args.communities);
    set(&mut spec.journals_per_community, args.journals_per_community);
    set(&mut spec.sessions, args.sessions);
    set(&mut spec.cross_community_prob, args.cross_community);
    set(&mut spec.bot_fraction, args.bot_fraction);
    spec.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let summary = generate_corpus(&spec, &args.out).map_err(|e| Failure::Stage(e.to_string()))?;
    if args.write_config {
        write_corpus_config(&args.out, spec.seed, spec.census_year).map_err(Failure::Stage)?;
    }
    println!(
        "{} journals, {} sessions ({} robots), {} events, {} citation records",
        summary.journals, summary.sessions, summary.bot_sessions, summary.events, summary.citation_records
    );
    Ok(())
}

fn write_corpus_config(dir: &Path, seed: u64, census_year: i32) -> Result<(), String> {
    let config = PipelineConfig {
        usage_log: "usage.csv".into(),
        citations: Some("citations.csv".into()),
        article_counts: Some("article_counts.csv".into()),
        journal_registry: "registry.csv".into(),
        equivalences: Some("equivalences.csv".into()),
        output_dir: "out".into(),
        salt_env: None,
        salt_file: Some("salt.txt".into()),
        census_year,
        ..Default::default()
    };
    let io = |e: std::io::Error| e.to_string();
    std::fs::write(dir.join("salt.txt"), format!("synthetic-salt-{seed}\n")).map_err(io)?;
    std::fs::write(dir.join("usagenet.toml"), config.to_toml()).map_err(io)
}

fn print_report(report: &RunReport, out: &Path) {
    for t in &report.stages {
        println!("{:<11} {:?} {:.2}s", t.stage.as_str(), t.status, t.wall_secs);
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("report: {}", out.join(artifacts::REPORT).display());
}

fn run(command: Command) -> Result<bool, Failure> {
    let (config, stages) = match command {
        Command::Synth(args) => return synth(args).map(|()| false),
        Command::Ingest { common, ingest } => {
            let mut c = common.load()?;
            ingest.apply(&mut c);
            (c, vec![Stage::Ingest])
        }
        Command::Sessionize { common, sessions } => {
            let mut c = common.load()?;
            sessions.apply(&mut c);
            (c, vec![Stage::Sessionize])
        }
        Command::Resolve { common, resolve } => {
            let mut c = common.load()?;
            resolve.apply(&mut c);
            (c, vec![Stage::Resolve])
        }
        Command::BuildNet { common, net, census } => {
            let mut c = common.load()?;
            net.apply(&mut c);
            census.apply(&mut c);
            (c, vec![Stage::BuildNet])
        }
        Command::Metrics { common, metrics, census } => {
            let mut c = common.load()?;
            metrics.apply(&mut c);
            census.apply(&mut c);
            (c, vec![Stage::Metrics])
        }
        Command::Correlate { common } => (common.load()?, vec![Stage::Correlate]),
        Command::Pca { common } => (common.load()?, vec![Stage::Pca]),
        Command::Map { common, map } => {
            let mut c = common.load()?;
            map.apply(&mut c);
            (c, vec![Stage::Map])
        }
        Command::Run { common, ingest, sessions, resolve, net, census, metrics, map } => {
            let mut c = common.load()?;
            ingest.apply(&mut c);
            sessions.apply(&mut c);
            resolve.apply(&mut c);
            net.apply(&mut c);
            census.apply(&mut c);
            metrics.apply(&mut c);
            map.apply(&mut c);
            (c, Stage::ALL.to_vec())
        }
    };
    let report = run_stages(&config, &stages)?;
    print_report(&report, &config.output_dir);
    Ok(stages.contains(&Stage::Metrics) && report.partial())
}

fn init_logging(style: LogStyle) {
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info"));
    let builder = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr);
    match style {
        LogStyle::Text => builder.init(),
        LogStyle::Json => builder.json().init(),
        LogStyle::Off => {}
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_logging(cli.log);
    match run(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("finished with skipped or failed metric specs");
            ExitCode::from(3)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Stage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
