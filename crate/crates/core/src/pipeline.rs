//! End-to-end orchestration: ingest, sessionize, resolve, build-net,
//! metrics, correlate, pca and map, each persisting its artifacts in the
//! output directory.
//!
//! Every stage writes its files atomically and then a marker under
//! `stages/` holding a fingerprint of its configuration and upstream
//! fingerprints together with the stage's counters. A run with `resume`
//! set skips stages whose marker matches. A stage run on its own reads its
//! inputs from the artifacts of earlier stages, so running the stages one by
//! one produces the same files as a single run.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Instant, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{JournalId, WeightedDigraph};
use crate::identify::{normalize_issn, normalize_title, MatchMethod, QualityReport, Registry, DEFAULT_THRESHOLD};
use crate::ingest::{
    anonymize, parse_article_counts, parse_citation_records, parse_usage_log, read_events, write_article_counts,
    write_citation_records, write_events, write_parse_errors, Anonymizer, ArticleCountRecord, CitationRecord,
    LogFormat, RawArtifactRef, UsageEvent,
};
use crate::metrics::{
    default_registry, read_metrics_table, read_registry, run_catalog, write_metrics_table, CatalogInputs,
    CatalogParams, ImpactInputs, MetricFailure, MetricRanking, PageRankParams,
};
use crate::metricstats::{correlation_matrix, pca, pca_svg, read_correlation_matrix, write_correlation_matrix, write_pca};
use crate::netbuild::{build_citation_network, build_usage_network, default_window, BuildStats, UsageOptions};
use crate::scimap::{export_map, fr_layout, graph_params, largest_connected_component, prune, GraphParams, LayoutParams, MapStyle, PruneSpec};
use crate::sessionize::{
    classify_and_conflate, group_sessions, read_sessions, write_sessions, BotPolicy, Classification, Session,
    DEFAULT_TIMEOUT_SECS,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("stage {stage}: {message}")]
    Stage { stage: Stage, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Ingest,
    Sessionize,
    Resolve,
    BuildNet,
    Metrics,
    Correlate,
    Pca,
    Map,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Ingest,
        Stage::Sessionize,
        Stage::Resolve,
        Stage::BuildNet,
        Stage::Metrics,
        Stage::Correlate,
        Stage::Pca,
        Stage::Map,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Sessionize => "sessionize",
            Stage::Resolve => "resolve",
            Stage::BuildNet => "build-net",
            Stage::Metrics => "metrics",
            Stage::Correlate => "correlate",
            Stage::Pca => "pca",
            Stage::Map => "map",
        }
    }

    /// Stages whose artifacts this one reads.
    fn upstream(self) -> &'static [Stage] {
        match self {
            Stage::Ingest => &[],
            Stage::Sessionize => &[Stage::Ingest],
            Stage::Resolve => &[Stage::Ingest, Stage::Sessionize],
            Stage::BuildNet => &[Stage::Sessionize, Stage::Resolve],
            Stage::Metrics => &[Stage::Resolve, Stage::BuildNet],
            Stage::Correlate => &[Stage::Metrics],
            Stage::Pca => &[Stage::Correlate],
            Stage::Map => &[Stage::Resolve, Stage::BuildNet],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| PipelineError::Config(format!("unknown stage {s:?}")))
    }
}

/// Run configuration. Relative paths in a config file are taken relative
/// to the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub usage_log: PathBuf,
    pub log_format: LogFormat,
    /// Without citation records (or article counts) the catalog runs on
    /// usage alone.
    pub citations: Option<PathBuf>,
    pub article_counts: Option<PathBuf>,
    pub journal_registry: PathBuf,
    pub equivalences: Option<PathBuf>,
    /// Metric registry file; the built-in 47-metric registry when absent.
    pub metric_registry: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Environment variable holding the anonymization salt.
    pub salt_env: Option<String>,
    /// File holding the anonymization salt; takes precedence over `salt_env`.
    pub salt_file: Option<PathBuf>,
    pub session_timeout_secs: i64,
    pub bot_policy: BotPolicy,
    pub dedup_threshold: f64,
    pub usage_network: UsageOptions,
    pub census_year: i32,
    /// Publication years counted for the census; the two preceding years
    /// when absent.
    pub window: Option<Vec<i32>>,
    pub pagerank: PageRankParams,
    pub map_network: MapNetwork,
    pub prune: PruneSpec,
    pub layout: LayoutParams,
    pub style: MapStyle,
    /// Upper bound on worker threads; all cores when absent.
    pub workers: Option<usize>,
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapNetwork {
    #[default]
    Usage,
    Citation,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            usage_log: PathBuf::from("usage.csv"),
            log_format: LogFormat::Delimited,
            citations: None,
            article_counts: None,
            journal_registry: PathBuf::from("registry.csv"),
            equivalences: None,
            metric_registry: None,
            output_dir: PathBuf::from("out"),
            salt_env: Some("USAGENET_SALT".into()),
            salt_file: None,
            session_timeout_secs: DEFAULT_TIMEOUT_SECS,
            bot_policy: BotPolicy::default(),
            dedup_threshold: DEFAULT_THRESHOLD,
            usage_network: UsageOptions::default(),
            census_year: 2005,
            window: None,
            pagerank: PageRankParams::default(),
            map_network: MapNetwork::Usage,
            prune: PruneSpec::default(),
            layout: LayoutParams::default(),
            style: MapStyle::default(),
            workers: None,
            resume: false,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut c: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        c.rebase(base);
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.usage_log);
        fix(&mut self.journal_registry);
        fix(&mut self.output_dir);
        for p in [&mut self.citations, &mut self.article_counts, &mut self.equivalences, &mut self.metric_registry, &mut self.salt_file] {
            if let Some(p) = p {
                fix(p);
            }
        }
    }

    pub fn window_years(&self) -> BTreeSet<i32> {
        match &self.window {
            Some(w) => w.iter().copied().collect(),
            None => default_window(self.census_year),
        }
    }

    /// Range checks plus existence of the required input files.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.session_timeout_secs <= 0 {
            return bad(format!("session_timeout_secs must be positive, got {}", self.session_timeout_secs));
        }
        if !(self.dedup_threshold > 0.0 && self.dedup_threshold <= 1.0) {
            return bad(format!("dedup_threshold must lie in (0, 1], got {}", self.dedup_threshold));
        }
        if self.usage_network.session_cap < 2 {
            return bad("usage_network.session_cap must be at least 2".into());
        }
        let p = &self.pagerank;
        if !(p.damping > 0.0 && p.damping < 1.0) || !(p.tol > 0.0) || p.max_iter == 0 {
            return bad("pagerank needs 0 < damping < 1, tol > 0 and max_iter > 0".into());
        }
        if self.bot_policy.max_length == 0 || !(self.bot_policy.min_median_gap >= 0.0) {
            return bad("bot_policy needs max_length > 0 and min_median_gap >= 0".into());
        }
        if self.prune.top_k_edges == 0 || self.layout.iterations == 0 || !(self.layout.area > 0.0) {
            return bad("prune.top_k_edges, layout.iterations and layout.area must be positive".into());
        }
        let window = self.window_years();
        if window.is_empty() || window.iter().any(|&y| y > self.census_year) {
            return bad("window must be non-empty and not after census_year".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        let required = [Some(&self.usage_log), Some(&self.journal_registry), self.equivalences.as_ref(), self.metric_registry.as_ref(), self.salt_file.as_ref()];
        for path in required.into_iter().flatten() {
            if !path.is_file() {
                return bad(format!("{} does not exist", path.display()));
            }
        }
        Ok(())
    }

    fn salt(&self) -> Result<Vec<u8>, PipelineError> {
        if let Some(path) = &self.salt_file {
            let s = fs::read(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
            let trimmed = s.trim_ascii_end().to_vec();
            if trimmed.is_empty() {
                return Err(PipelineError::Config(format!("{} is empty", path.display())));
            }
            return Ok(trimmed);
        }
        if let Some(var) = &self.salt_env {
            return match std::env::var(var) {
                Ok(v) if !v.is_empty() => Ok(v.into_bytes()),
                _ => Err(PipelineError::Config(format!("salt variable {var} is unset or empty"))),
            };
        }
        Err(PipelineError::Config("no salt source configured".into()))
    }
}

/// Names of the files a run writes under the output directory.
pub mod artifacts {
    pub const EVENTS: &str = "events.csv";
    pub const PARSE_ERRORS: &str = "parse_errors.jsonl";
    pub const CITATIONS: &str = "citations.csv";
    pub const ARTICLE_COUNTS: &str = "article_counts.csv";
    pub const SESSIONS: &str = "sessions.jsonl";
    pub const RESOLUTIONS: &str = "resolutions.csv";
    pub const CITATIONS_RESOLVED: &str = "citations_resolved.csv";
    pub const ARTICLE_COUNTS_RESOLVED: &str = "article_counts_resolved.csv";
    pub const USAGE_NETWORK: &str = "usage_network.csv";
    pub const CITATION_NETWORK: &str = "citation_network.csv";
    pub const METRICS: &str = "metrics.csv";
    pub const CATALOG: &str = "catalog.json";
    pub const CORRELATIONS: &str = "correlations.csv";
    pub const PCA: &str = "pca.csv";
    pub const PCA_SVG: &str = "pca.svg";
    pub const MAP_SVG: &str = "map.svg";
    pub const MAP_DOT: &str = "map.dot";
    pub const MAP_GRAPHML: &str = "map.graphml";
    pub const LAYOUT: &str = "layout.csv";
    pub const GRAPH_PARAMS: &str = "graph_params.json";
    pub const REPORT: &str = "run_report.json";
    pub const STAGES_DIR: &str = "stages";
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestCounts {
    pub events: u64,
    pub parse_errors: u64,
    pub citation_records: Option<u64>,
    pub citation_errors: u64,
    pub article_count_records: Option<u64>,
    pub article_count_errors: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionCounts {
    pub sessions: u64,
    pub human: u64,
    pub robot: u64,
    pub undecided: u64,
    /// Events with neither session key nor agent.
    pub rejected_events: u64,
    /// Events left after conflating repeats.
    pub conflated_events: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolveCounts {
    /// Usage events by match method.
    pub usage: QualityReport,
    pub distinct_descriptions: u64,
    pub citation_records_resolved: u64,
    pub citation_records_unresolved: u64,
    pub article_counts_resolved: u64,
    pub article_counts_unresolved: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkCounts {
    pub usage: BuildStats,
    pub usage_nodes: u64,
    pub usage_edges: u64,
    pub citation: Option<BuildStats>,
    pub citation_nodes: u64,
    pub citation_edges: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CatalogCounts {
    pub rankings: u64,
    pub common_journals: u64,
    pub skipped: Vec<MetricFailure>,
    pub failures: Vec<MetricFailure>,
    pub warnings: Vec<String>,
    pub if_excluded: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCounts {
    pub dim: u64,
    pub common_journals: u64,
    pub flagged_cells: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MapCounts {
    pub network: Option<MapNetwork>,
    pub pruned_nodes: u64,
    pub pruned_edges: u64,
    pub params: Option<GraphParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ran,
    Resumed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub status: StageStatus,
    pub wall_secs: f64,
}

/// Counters of every stage that has completed, plus timings of this run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub stages: Vec<StageTiming>,
    pub ingest: Option<IngestCounts>,
    pub sessions: Option<SessionCounts>,
    pub resolve: Option<ResolveCounts>,
    pub networks: Option<NetworkCounts>,
    pub catalog: Option<CatalogCounts>,
    pub correlation: Option<CorrelationCounts>,
    /// Explained variance fractions of the metric PCA.
    pub pca_explained: Option<Vec<f64>>,
    pub map: Option<MapCounts>,
    pub warnings: Vec<String>,
}

impl RunReport {
    /// True when the catalog skipped or failed any spec.
    pub fn partial(&self) -> bool {
        self.catalog.as_ref().is_some_and(|c| !c.skipped.is_empty() || !c.failures.is_empty())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "stage", content = "counts", rename_all = "kebab-case")]
enum StageCounts {
    Ingest(IngestCounts),
    Sessionize(SessionCounts),
    Resolve(ResolveCounts),
    BuildNet(NetworkCounts),
    Metrics(CatalogCounts),
    Correlate(CorrelationCounts),
    Pca(Vec<f64>),
    Map(MapCounts),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Marker {
    fingerprint: String,
    counts: StageCounts,
    warnings: Vec<String>,
}

type DescKey = (Option<Arc<str>>, Option<Arc<str>>);

fn desc_key(r: &RawArtifactRef) -> DescKey {
    (r.issn.clone(), r.title.clone())
}

/// In-memory results handed from one stage to the next within a run.
#[derive(Default)]
struct Carry {
    events: Option<Vec<UsageEvent>>,
    citations: Option<Option<Vec<CitationRecord>>>,
    counts: Option<Option<Vec<ArticleCountRecord>>>,
    sessions: Option<Vec<Session>>,
    resolutions: Option<HashMap<DescKey, Option<JournalId>>>,
    citations_resolved: Option<Option<Vec<CitationRecord>>>,
    counts_resolved: Option<Option<Vec<ArticleCountRecord>>>,
    usage_graph: Option<WeightedDigraph>,
    citation_graph: Option<Option<WeightedDigraph>>,
    rankings: Option<Vec<MetricRanking>>,
    correlations: Option<crate::metricstats::CorrelationMatrix>,
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    out: PathBuf,
    carry: Carry,
    fingerprints: BTreeMap<Stage, String>,
    report: RunReport,
}

fn file_stamp(path: &Path) -> String {
    match fs::metadata(path) {
        Ok(m) => {
            let mtime = m.modified().ok().and_then(|t| t.duration_since(UNIX_EPOCH).ok()).map_or(0, |d| d.as_nanos());
            format!("{}:{}:{mtime}", path.display(), m.len())
        }
        Err(_) => format!("{}:missing", path.display()),
    }
}

/// Writes through a temporary sibling and renames, so a failing stage never
/// leaves a half-written artifact in place of the last good one.
fn write_atomic<F>(path: &Path, f: F) -> Result<(), String>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), String>,
{
    let tmp = path.with_file_name(format!(
        "{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact")
    ));
    let file = File::create(&tmp).map_err(|e| format!("{}: {e}", tmp.display()))?;
    let mut w = BufWriter::with_capacity(1 << 20, file);
    f(&mut w)?;
    w.flush().map_err(|e| e.to_string())?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, String> {
    File::open(path).map(|f| BufReader::with_capacity(1 << 20, f)).map_err(|e| format!("{}: {e}", path.display()))
}

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

impl<'a> Runner<'a> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn marker_path(&self, stage: Stage) -> PathBuf {
        self.out.join(artifacts::STAGES_DIR).join(format!("{}.json", stage.as_str()))
    }

    fn read_marker(&self, stage: Stage) -> Option<Marker> {
        let text = fs::read_to_string(self.marker_path(stage)).ok()?;
        serde_json::from_str(&text).ok()
    }

    /// Configuration and inputs a stage depends on, chained with the
    /// fingerprints of its upstream stages.
    fn fingerprint(&mut self, stage: Stage) -> Result<String, PipelineError> {
        let cfg = self.cfg;
        let mut h = Sha256::new();
        h.update(stage.as_str());
        for up in stage.upstream() {
            let fp = match self.fingerprints.get(up) {
                Some(fp) => fp.clone(),
                None => self
                    .read_marker(*up)
                    .map(|m| m.fingerprint)
                    .ok_or_else(|| PipelineError::Stage { stage, message: format!("stage {up} has not been run") })?,
            };
            h.update(fp);
        }
        let own = match stage {
            Stage::Ingest => {
                let salt = cfg.salt()?;
                let salt_tag = anonymize("fingerprint", &salt).map_err(|e| PipelineError::Config(e.to_string()))?;
                let stamps: Vec<String> = [Some(&cfg.usage_log), cfg.citations.as_ref(), cfg.article_counts.as_ref()]
                    .into_iter()
                    .map(|p| p.map(|p| file_stamp(p)).unwrap_or_default())
                    .collect();
                serde_json::json!({"format": cfg.log_format, "salt": salt_tag.as_str(), "inputs": stamps})
            }
            Stage::Sessionize => serde_json::json!({"timeout": cfg.session_timeout_secs, "bots": cfg.bot_policy}),
            Stage::Resolve => serde_json::json!({
                "threshold": cfg.dedup_threshold,
                "registry": file_stamp(&cfg.journal_registry),
                "equivalences": cfg.equivalences.as_ref().map(|p| file_stamp(p)),
            }),
            Stage::BuildNet => serde_json::json!({
                "usage": cfg.usage_network,
                "census": cfg.census_year,
                "window": cfg.window_years(),
            }),
            Stage::Metrics => serde_json::json!({
                "registry": cfg.metric_registry.as_ref().map(|p| file_stamp(p)),
                "pagerank": cfg.pagerank,
                "census": cfg.census_year,
                "window": cfg.window_years(),
            }),
            Stage::Correlate | Stage::Pca => serde_json::json!({}),
            Stage::Map => serde_json::json!({
                "network": cfg.map_network,
                "prune": cfg.prune,
                "layout": cfg.layout,
                "style": cfg.style,
            }),
        };
        h.update(own.to_string());
        Ok(hex::encode(h.finalize()))
    }

    fn run_stage(&mut self, stage: Stage) -> Result<(), PipelineError> {
        let start = Instant::now();
        let fp = self.fingerprint(stage)?;
        if self.cfg.resume {
            if let Some(m) = self.read_marker(stage).filter(|m| m.fingerprint == fp) {
                tracing::info!(stage = stage.as_str(), "resumed from persisted artifacts");
                self.absorb(m.counts, m.warnings);
                self.fingerprints.insert(stage, fp);
                self.report.stages.push(StageTiming { stage, status: StageStatus::Resumed, wall_secs: start.elapsed().as_secs_f64() });
                return Ok(());
            }
        }
        let marker = self.marker_path(stage);
        if marker.exists() {
            fs::remove_file(&marker).map_err(|e| PipelineError::Stage { stage, message: e.to_string() })?;
        }
        let mut warnings = Vec::new();
        let counts = self.execute(stage, &mut warnings).map_err(|message| PipelineError::Stage { stage, message })?;
        let m = Marker { fingerprint: fp.clone(), counts: counts.clone(), warnings: warnings.clone() };
        write_atomic(&marker, |w| serde_json::to_writer_pretty(w, &m).map_err(err))
            .map_err(|message| PipelineError::Stage { stage, message })?;
        let wall = start.elapsed().as_secs_f64();
        tracing::info!(stage = stage.as_str(), wall_secs = wall, counts = %serde_json::to_string(&counts).unwrap_or_default(), "stage complete");
        self.absorb(counts, warnings);
        self.fingerprints.insert(stage, fp);
        self.report.stages.push(StageTiming { stage, status: StageStatus::Ran, wall_secs: wall });
        Ok(())
    }

    fn absorb(&mut self, counts: StageCounts, warnings: Vec<String>) {
        self.report.warnings.extend(warnings);
        let r = &mut self.report;
        match counts {
            StageCounts::Ingest(c) => r.ingest = Some(c),
            StageCounts::Sessionize(c) => r.sessions = Some(c),
            StageCounts::Resolve(c) => r.resolve = Some(c),
            StageCounts::BuildNet(c) => r.networks = Some(c),
            StageCounts::Metrics(c) => r.catalog = Some(c),
            StageCounts::Correlate(c) => r.correlation = Some(c),
            StageCounts::Pca(c) => r.pca_explained = Some(c),
            StageCounts::Map(c) => r.map = Some(c),
        }
    }

    fn execute(&mut self, stage: Stage, warnings: &mut Vec<String>) -> Result<StageCounts, String> {
        match stage {
            Stage::Ingest => self.ingest(warnings).map(StageCounts::Ingest),
            Stage::Sessionize => self.sessionize().map(StageCounts::Sessionize),
            Stage::Resolve => self.resolve(warnings).map(StageCounts::Resolve),
            Stage::BuildNet => self.build_net().map(StageCounts::BuildNet),
            Stage::Metrics => self.metrics(warnings).map(StageCounts::Metrics),
            Stage::Correlate => self.correlate().map(StageCounts::Correlate),
            Stage::Pca => self.pca().map(StageCounts::Pca),
            Stage::Map => self.map().map(StageCounts::Map),
        }
    }

    fn optional_input(&self, path: &Option<PathBuf>, what: &str, warnings: &mut Vec<String>) -> Option<PathBuf> {
        match path {
            Some(p) if p.is_file() => Some(p.clone()),
            Some(p) => {
                warnings.push(format!("{what} file {} not found; continuing without it", p.display()));
                None
            }
            None => None,
        }
    }

    fn ingest(&mut self, warnings: &mut Vec<String>) -> Result<IngestCounts, String> {
        let salt = self.cfg.salt().map_err(err)?;
        let mut anon = Anonymizer::new(&salt).map_err(err)?;
        let parsed = parse_usage_log(open(&self.cfg.usage_log)?, self.cfg.log_format, &mut anon).map_err(err)?;
        let mut counts = IngestCounts {
            events: parsed.records.len() as u64,
            parse_errors: parsed.errors.len() as u64,
            ..Default::default()
        };
        write_atomic(&self.path(artifacts::EVENTS), |w| write_events(w, &parsed.records).map_err(err))?;
        write_atomic(&self.path(artifacts::PARSE_ERRORS), |w| write_parse_errors(w, &parsed.errors).map_err(err))?;
        if counts.parse_errors > 0 {
            warnings.push(format!("{} malformed usage lines skipped", counts.parse_errors));
        }

        let citations = match self.optional_input(&self.cfg.citations, "citation", warnings) {
            Some(p) => {
                let c = parse_citation_records(open(&p)?).map_err(err)?;
                counts.citation_records = Some(c.records.len() as u64);
                counts.citation_errors = c.errors.len() as u64;
                write_atomic(&self.path(artifacts::CITATIONS), |w| write_citation_records(w, &c.records).map_err(err))?;
                Some(c.records)
            }
            None => {
                remove_if_exists(&self.path(artifacts::CITATIONS))?;
                None
            }
        };
        let article_counts = match self.optional_input(&self.cfg.article_counts, "article count", warnings) {
            Some(p) => {
                let c = parse_article_counts(open(&p)?).map_err(err)?;
                counts.article_count_records = Some(c.records.len() as u64);
                counts.article_count_errors = c.errors.len() as u64;
                write_atomic(&self.path(artifacts::ARTICLE_COUNTS), |w| write_article_counts(w, &c.records).map_err(err))?;
                Some(c.records)
            }
            None => {
                remove_if_exists(&self.path(artifacts::ARTICLE_COUNTS))?;
                None
            }
        };
        self.carry.events = Some(parsed.records);
        self.carry.citations = Some(citations);
        self.carry.counts = Some(article_counts);
        Ok(counts)
    }

    fn take_events(&mut self) -> Result<Vec<UsageEvent>, String> {
        match self.carry.events.take() {
            Some(e) => Ok(e),
            None => read_events(open(&self.path(artifacts::EVENTS))?).map_err(err),
        }
    }

    fn sessionize(&mut self) -> Result<SessionCounts, String> {
        let events = self.take_events()?;
        let grouping = group_sessions(events, self.cfg.session_timeout_secs);
        let sessions = classify_and_conflate(grouping.sessions, &self.cfg.bot_policy);
        write_atomic(&self.path(artifacts::SESSIONS), |w| write_sessions(w, &sessions).map_err(err))?;
        let count = |c: Classification| sessions.iter().filter(|s| s.classification == c).count() as u64;
        let counts = SessionCounts {
            sessions: sessions.len() as u64,
            human: count(Classification::Human),
            robot: count(Classification::Robot),
            undecided: count(Classification::Undecided),
            rejected_events: grouping.rejected.len() as u64,
            conflated_events: sessions.iter().map(|s| s.events.len() as u64).sum(),
        };
        self.carry.sessions = Some(sessions);
        Ok(counts)
    }

    fn sessions(&mut self) -> Result<&Vec<Session>, String> {
        if self.carry.sessions.is_none() {
            let events = read_events(open(&self.path(artifacts::EVENTS))?).map_err(err)?;
            let s = read_sessions(open(&self.path(artifacts::SESSIONS))?, events).map_err(err)?;
            self.carry.sessions = Some(s);
        }
        Ok(self.carry.sessions.as_ref().expect("loaded above"))
    }

    fn citations(&mut self) -> Result<Option<Vec<CitationRecord>>, String> {
        if let Some(c) = self.carry.citations.take() {
            return Ok(c);
        }
        let p = self.path(artifacts::CITATIONS);
        if !p.is_file() {
            return Ok(None);
        }
        let parsed = parse_citation_records(open(&p)?).map_err(err)?;
        Ok(Some(parsed.records))
    }

    fn article_counts(&mut self) -> Result<Option<Vec<ArticleCountRecord>>, String> {
        if let Some(c) = self.carry.counts.take() {
            return Ok(c);
        }
        let p = self.path(artifacts::ARTICLE_COUNTS);
        if !p.is_file() {
            return Ok(None);
        }
        Ok(Some(parse_article_counts(open(&p)?).map_err(err)?.records))
    }

    fn resolve(&mut self, warnings: &mut Vec<String>) -> Result<ResolveCounts, String> {
        let cfg = self.cfg;
        let equivalences = match &cfg.equivalences {
            Some(p) => Some(open(p)?),
            None => None,
        };
        let registry = Registry::read(open(&cfg.journal_registry)?, equivalences).map_err(err)?;

        let mut raw_counts: HashMap<DescKey, u64> = HashMap::new();
        for s in self.sessions()? {
            for e in &s.events {
                *raw_counts.entry(desc_key(&e.artifact_ref)).or_insert(0) += 1;
            }
        }
        // Resolution depends only on the normalized ISSN and title, so
        // descriptions differing in spelling alone are resolved once.
        let mut raw: Vec<(DescKey, u64)> = raw_counts.into_iter().collect();
        raw.sort_unstable();
        let normalized: Vec<(Option<String>, String)> = raw
            .par_iter()
            .map(|((issn, title), _)| {
                (issn.as_deref().and_then(normalize_issn), title.as_deref().map(normalize_title).unwrap_or_default())
            })
            .collect();
        let mut distinct: Vec<&(Option<String>, String)> = normalized.iter().collect();
        distinct.sort_unstable();
        distinct.dedup();
        let threshold = cfg.dedup_threshold;
        let decided: HashMap<&(Option<String>, String), (Option<JournalId>, MatchMethod, f64)> = distinct
            .par_iter()
            .map(|key| {
                let mut r = RawArtifactRef::new("");
                if let Some(i) = &key.0 {
                    r = r.with_issn(i);
                }
                if !key.1.is_empty() {
                    r = r.with_title(&key.1);
                }
                let d = registry.resolve(&r, threshold);
                (*key, (d.resolved, d.method, d.score))
            })
            .collect();

        let mut counts = ResolveCounts { distinct_descriptions: raw.len() as u64, ..Default::default() };
        let mut map = HashMap::with_capacity(raw.len());
        write_atomic(&self.path(artifacts::RESOLUTIONS), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["issn", "title", "journal_id", "method", "score", "events"]).map_err(err)?;
            for ((key, n), norm) in raw.iter().zip(&normalized) {
                let (id, method, score) = &decided[norm];
                counts.usage.add(*method, *n);
                out.write_record([
                    key.0.as_deref().unwrap_or(""),
                    key.1.as_deref().unwrap_or(""),
                    id.as_ref().map_or("", |j| j.as_str()),
                    method_name(*method),
                    &score.to_string(),
                    &n.to_string(),
                ])
                .map_err(err)?;
                map.insert(key.clone(), id.clone());
            }
            out.flush().map_err(err)
        })?;
        if counts.usage.unresolved_rate > 0.0 {
            warnings.push(format!("{:.2}% of usage events unresolved", 100.0 * counts.usage.unresolved_rate));
        }

        let mut ref_cache: HashMap<String, Option<JournalId>> = HashMap::new();
        let mut lookup = |r: &str| -> Option<JournalId> {
            ref_cache.entry(r.to_owned()).or_insert_with(|| registry.resolve_journal_ref(r, threshold)).clone()
        };
        let citations = self.citations()?.map(|records| {
            let mut out = Vec::with_capacity(records.len());
            for mut r in records {
                match (lookup(&r.citing_journal), lookup(&r.cited_journal)) {
                    (Some(a), Some(b)) => {
                        r.citing_journal = a.to_string();
                        r.cited_journal = b.to_string();
                        out.push(r);
                        counts.citation_records_resolved += 1;
                    }
                    _ => counts.citation_records_unresolved += 1,
                }
            }
            out
        });
        let article_counts = self.article_counts()?.map(|records| {
            let mut out = Vec::with_capacity(records.len());
            for mut r in records {
                match lookup(&r.journal) {
                    Some(j) => {
                        r.journal = j.to_string();
                        out.push(r);
                        counts.article_counts_resolved += 1;
                    }
                    None => counts.article_counts_unresolved += 1,
                }
            }
            out
        });
        match &citations {
            Some(c) => write_atomic(&self.path(artifacts::CITATIONS_RESOLVED), |w| write_citation_records(w, c).map_err(err))?,
            None => remove_if_exists(&self.path(artifacts::CITATIONS_RESOLVED))?,
        }
        match &article_counts {
            Some(c) => write_atomic(&self.path(artifacts::ARTICLE_COUNTS_RESOLVED), |w| write_article_counts(w, c).map_err(err))?,
            None => remove_if_exists(&self.path(artifacts::ARTICLE_COUNTS_RESOLVED))?,
        }
        if counts.citation_records_unresolved > 0 {
            warnings.push(format!("{} citation records with unresolved journals dropped", counts.citation_records_unresolved));
        }
        self.carry.resolutions = Some(map);
        self.carry.citations_resolved = Some(citations);
        self.carry.counts_resolved = Some(article_counts);
        Ok(counts)
    }

    fn resolutions(&mut self) -> Result<HashMap<DescKey, Option<JournalId>>, String> {
        if let Some(m) = self.carry.resolutions.take() {
            return Ok(m);
        }
        let mut rdr = csv::Reader::from_reader(open(&self.path(artifacts::RESOLUTIONS))?);
        let mut map = HashMap::new();
        let opt = |s: &str| (!s.is_empty()).then(|| Arc::<str>::from(s));
        for rec in rdr.records() {
            let rec = rec.map_err(err)?;
            let id = (!rec[2].is_empty()).then(|| JournalId::new(&rec[2]));
            map.insert((opt(&rec[0]), opt(&rec[1])), id);
        }
        Ok(map)
    }

    fn citations_resolved(&mut self) -> Result<Option<Vec<CitationRecord>>, String> {
        if let Some(c) = self.carry.citations_resolved.clone() {
            return Ok(c);
        }
        let p = self.path(artifacts::CITATIONS_RESOLVED);
        let c = if p.is_file() { Some(parse_citation_records(open(&p)?).map_err(err)?.records) } else { None };
        self.carry.citations_resolved = Some(c.clone());
        Ok(c)
    }

    fn counts_resolved(&mut self) -> Result<Option<Vec<ArticleCountRecord>>, String> {
        if let Some(c) = self.carry.counts_resolved.clone() {
            return Ok(c);
        }
        let p = self.path(artifacts::ARTICLE_COUNTS_RESOLVED);
        let c = if p.is_file() { Some(parse_article_counts(open(&p)?).map_err(err)?.records) } else { None };
        self.carry.counts_resolved = Some(c.clone());
        Ok(c)
    }

    fn build_net(&mut self) -> Result<NetworkCounts, String> {
        let cfg = self.cfg;
        let resolutions = self.resolutions()?;
        let lookup = |r: &RawArtifactRef| resolutions.get(&desc_key(r)).cloned().flatten();
        let (usage, usage_stats) = build_usage_network(self.sessions()?, &lookup, &cfg.usage_network);
        // Sessions are not needed past this point.
        self.carry.sessions = None;
        write_atomic(&self.path(artifacts::USAGE_NETWORK), |w| usage.write_edge_list(w).map_err(err))?;
        let mut counts = NetworkCounts {
            usage: usage_stats,
            usage_nodes: usage.node_count() as u64,
            usage_edges: usage.edge_count() as u64,
            ..Default::default()
        };
        let citation = match self.citations_resolved()? {
            Some(records) => {
                let (g, stats) = build_citation_network(&records, cfg.census_year, &cfg.window_years());
                write_atomic(&self.path(artifacts::CITATION_NETWORK), |w| g.write_edge_list(w).map_err(err))?;
                counts.citation = Some(stats);
                counts.citation_nodes = g.node_count() as u64;
                counts.citation_edges = g.edge_count() as u64;
                Some(g)
            }
            None => {
                remove_if_exists(&self.path(artifacts::CITATION_NETWORK))?;
                None
            }
        };
        self.carry.usage_graph = Some(usage);
        self.carry.citation_graph = Some(citation);
        Ok(counts)
    }

    fn graphs(&mut self) -> Result<(WeightedDigraph, Option<WeightedDigraph>), String> {
        if self.carry.usage_graph.is_none() {
            let g = WeightedDigraph::read_edge_list(open(&self.path(artifacts::USAGE_NETWORK))?, false).map_err(err)?;
            self.carry.usage_graph = Some(g);
        }
        if self.carry.citation_graph.is_none() {
            let p = self.path(artifacts::CITATION_NETWORK);
            let g = if p.is_file() { Some(WeightedDigraph::read_edge_list(open(&p)?, true).map_err(err)?) } else { None };
            self.carry.citation_graph = Some(g);
        }
        Ok((
            self.carry.usage_graph.clone().expect("loaded above"),
            self.carry.citation_graph.clone().expect("loaded above"),
        ))
    }

    fn metrics(&mut self, warnings: &mut Vec<String>) -> Result<CatalogCounts, String> {
        let cfg = self.cfg;
        let registry = match &cfg.metric_registry {
            Some(p) => read_registry(open(p)?).map_err(err)?,
            None => default_registry(),
        };
        let (usage, citation) = self.graphs()?;
        let citations = self.citations_resolved()?;
        let article_counts = self.counts_resolved()?;
        let window = cfg.window_years();
        let impact = match (&citations, &article_counts) {
            (Some(c), Some(n)) => Some(ImpactInputs { citations: c, counts: n, census_year: cfg.census_year, window: &window }),
            _ => None,
        };
        let inputs = CatalogInputs { usage: Some(&usage), citation: citation.as_ref(), impact };
        let catalog = run_catalog(&inputs, &registry, &CatalogParams { pagerank: cfg.pagerank });
        write_atomic(&self.path(artifacts::METRICS), |w| write_metrics_table(w, &catalog.rankings).map_err(err))?;
        let counts = CatalogCounts {
            rankings: catalog.rankings.len() as u64,
            common_journals: catalog.common.len() as u64,
            skipped: catalog.skipped.clone(),
            failures: catalog.failures.clone(),
            warnings: catalog.warnings.clone(),
            if_excluded: catalog.if_excluded.len() as u64,
        };
        write_atomic(&self.path(artifacts::CATALOG), |w| {
            let doc = serde_json::json!({
                "common_journals": counts.common_journals,
                "skipped": catalog.skipped,
                "failures": catalog.failures,
                "warnings": catalog.warnings,
                "if_excluded": catalog.if_excluded,
            });
            serde_json::to_writer_pretty(w, &doc).map_err(err)
        })?;
        if !catalog.skipped.is_empty() {
            warnings.push(format!("{} metric specs skipped", catalog.skipped.len()));
        }
        if !catalog.failures.is_empty() {
            warnings.push(format!("{} metric specs failed", catalog.failures.len()));
        }
        warnings.extend(catalog.warnings.iter().cloned());
        self.carry.rankings = Some(catalog.rankings);
        Ok(counts)
    }

    fn correlate(&mut self) -> Result<CorrelationCounts, String> {
        let rankings = match self.carry.rankings.take() {
            Some(r) => r,
            None => read_metrics_table(open(&self.path(artifacts::METRICS))?).map_err(err)?,
        };
        let c = correlation_matrix(&rankings).map_err(err)?;
        write_atomic(&self.path(artifacts::CORRELATIONS), |w| write_correlation_matrix(w, &c).map_err(err))?;
        let counts = CorrelationCounts { dim: c.dim() as u64, common_journals: c.common_n as u64, flagged_cells: c.flagged.len() as u64 };
        self.carry.correlations = Some(c);
        Ok(counts)
    }

    fn pca(&mut self) -> Result<Vec<f64>, String> {
        let c = match self.carry.correlations.take() {
            Some(c) => c,
            None => read_correlation_matrix(open(&self.path(artifacts::CORRELATIONS))?).map_err(err)?,
        };
        let p = pca(&c, 2).map_err(err)?;
        write_atomic(&self.path(artifacts::PCA), |w| write_pca(w, &p).map_err(err))?;
        write_atomic(&self.path(artifacts::PCA_SVG), |w| w.write_all(pca_svg(&p).as_bytes()).map_err(err))?;
        Ok(p.explained)
    }

    fn map(&mut self) -> Result<MapCounts, String> {
        let cfg = self.cfg;
        let (usage, citation) = self.graphs()?;
        let g = match cfg.map_network {
            MapNetwork::Usage => usage,
            MapNetwork::Citation => citation.ok_or("citation network unavailable for the map")?,
        };
        let pruned = prune(&g, &cfg.prune);
        let lcc = largest_connected_component(&pruned).map_err(err)?;
        let params = graph_params(&lcc).map_err(err)?;
        let layout = fr_layout(&lcc, &cfg.layout);
        write_atomic(&self.path(artifacts::MAP_SVG), |w| w.write_all(export_map(&layout, &lcc, &cfg.style).as_bytes()).map_err(err))?;
        write_atomic(&self.path(artifacts::MAP_DOT), |w| lcc.write_dot(w).map_err(err))?;
        write_atomic(&self.path(artifacts::MAP_GRAPHML), |w| lcc.write_graphml(w).map_err(err))?;
        write_atomic(&self.path(artifacts::LAYOUT), |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["journal_id", "x", "y", "radius"]).map_err(err)?;
            for (id, (x, y)) in &layout.positions {
                let r = layout.radii.get(id).copied().unwrap_or(0.0);
                out.write_record([id.as_str(), &x.to_string(), &y.to_string(), &r.to_string()]).map_err(err)?;
            }
            out.flush().map_err(err)
        })?;
        write_atomic(&self.path(artifacts::GRAPH_PARAMS), |w| serde_json::to_writer_pretty(w, &params).map_err(err))?;
        Ok(MapCounts {
            network: Some(cfg.map_network),
            pruned_nodes: pruned.node_count() as u64,
            pruned_edges: pruned.edge_count() as u64,
            params: Some(params),
        })
    }
}

fn method_name(m: MatchMethod) -> &'static str {
    match m {
        MatchMethod::ExactIssn => "exact_issn",
        MatchMethod::EquivalenceTable => "equivalence_table",
        MatchMethod::FuzzyTitle => "fuzzy_title",
        MatchMethod::Unresolved => "unresolved",
    }
}

fn remove_if_exists(path: &Path) -> Result<(), String> {
    match fs::remove_file(path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(format!("{}: {e}", path.display())),
    }
}

/// Runs every stage in order. See [`run_stages`].
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunReport, PipelineError> {
    run_stages(config, &Stage::ALL)
}

/// Runs the given stages in pipeline order, reading anything they need from
/// earlier runs' artifacts. Writes `run_report.json` when all of them
/// succeed; a failing stage stops the run and leaves the artifacts of
/// completed stages in place.
pub fn run_stages(config: &PipelineConfig, stages: &[Stage]) -> Result<RunReport, PipelineError> {
    config.validate()?;
    fs::create_dir_all(config.output_dir.join(artifacts::STAGES_DIR))
        .map_err(|e| PipelineError::Config(format!("{}: {e}", config.output_dir.display())))?;
    let mut order: Vec<Stage> = stages.to_vec();
    order.sort_unstable();
    order.dedup();

    let work = || {
        let mut runner = Runner {
            cfg: config,
            out: config.output_dir.clone(),
            carry: Carry::default(),
            fingerprints: BTreeMap::new(),
            report: RunReport::default(),
        };
        for &stage in &order {
            runner.run_stage(stage)?;
        }
        // Counters of stages not run here still belong in the report.
        for stage in Stage::ALL {
            if !order.contains(&stage) {
                if let Some(m) = runner.read_marker(stage) {
                    runner.absorb(m.counts, Vec::new());
                }
            }
        }
        let report = runner.report;
        write_atomic(&config.output_dir.join(artifacts::REPORT), |w| serde_json::to_writer_pretty(w, &report).map_err(err))
            .map_err(|message| PipelineError::Stage { stage: *order.last().unwrap_or(&Stage::Ingest), message })?;
        Ok(report)
    };
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?
            .install(work),
        None => work(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Network;
    use crate::synth::{generate_corpus, CorpusPaths, SynthSpec};

    fn setup(dir: &Path, sessions: usize) -> PipelineConfig {
        let spec = SynthSpec { sessions, journals_per_community: 8, ..Default::default() };
        generate_corpus(&spec, &dir.join("corpus")).unwrap();
        let paths = CorpusPaths::in_dir(&dir.join("corpus"));
        fs::write(dir.join("salt"), "pepper\n").unwrap();
        PipelineConfig {
            usage_log: paths.usage,
            citations: Some(paths.citations),
            article_counts: Some(paths.article_counts),
            journal_registry: paths.registry,
            equivalences: Some(paths.equivalences),
            output_dir: dir.join("out"),
            salt_file: Some(dir.join("salt")),
            salt_env: None,
            layout: LayoutParams { iterations: 50, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn config_round_trips_and_rebases() {
        let c = PipelineConfig { citations: Some("c.csv".into()), ..Default::default() };
        let back = PipelineConfig::from_toml(&c.to_toml(), Path::new("/data")).unwrap();
        assert_eq!(back.citations, Some(PathBuf::from("/data/c.csv")));
        assert_eq!(back.usage_log, PathBuf::from("/data/usage.csv"));
        assert!(PipelineConfig::from_toml("bogus = 1", Path::new(".")).is_err());
        let t = PipelineConfig::from_toml("dedup_threshold = 0.8\n[bot_policy]\nmax_length = 50\n", Path::new(".")).unwrap();
        assert_eq!((t.dedup_threshold, t.bot_policy.max_length, t.bot_policy.min_length_for_gap_test), (0.8, 50, 10));
    }

    #[test]
    fn validation_catches_ranges_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let c = setup(dir.path(), 20);
        assert!(c.validate().is_ok());
        assert!(PipelineConfig { dedup_threshold: 1.5, ..c.clone() }.validate().is_err());
        assert!(PipelineConfig { usage_log: dir.path().join("nope"), ..c.clone() }.validate().is_err());
        assert!(PipelineConfig { window: Some(vec![2010]), ..c.clone() }.validate().is_err());
    }

    #[test]
    fn full_run_then_resume() {
        let dir = tempfile::tempdir().unwrap();
        let c = setup(dir.path(), 300);
        let r = run_pipeline(&c).unwrap();
        assert_eq!(r.stages.len(), 8);
        assert!(r.stages.iter().all(|s| s.status == StageStatus::Ran));
        assert_eq!(r.catalog.as_ref().unwrap().rankings, 47);
        assert!(!r.partial());
        for f in [artifacts::METRICS, artifacts::MAP_SVG, artifacts::PCA, artifacts::LAYOUT, artifacts::REPORT] {
            assert!(c.output_dir.join(f).is_file(), "{f}");
        }
        let metrics = fs::read(c.output_dir.join(artifacts::METRICS)).unwrap();
        let resumed = run_pipeline(&PipelineConfig { resume: true, ..c.clone() }).unwrap();
        assert!(resumed.stages.iter().all(|s| s.status == StageStatus::Resumed));
        assert_eq!(resumed.catalog, r.catalog);
        assert_eq!(fs::read(c.output_dir.join(artifacts::METRICS)).unwrap(), metrics);

        // A changed map setting reruns the map alone.
        let moved = run_pipeline(&PipelineConfig { resume: true, layout: LayoutParams { seed: 9, ..c.layout }, ..c.clone() }).unwrap();
        let ran: Vec<Stage> = moved.stages.iter().filter(|s| s.status == StageStatus::Ran).map(|s| s.stage).collect();
        assert_eq!(ran, vec![Stage::Map]);
    }

    #[test]
    fn missing_citations_fall_back_to_usage() {
        let dir = tempfile::tempdir().unwrap();
        let c = PipelineConfig { citations: Some(dir.path().join("absent.csv")), ..setup(dir.path(), 200) };
        let r = run_pipeline(&c).unwrap();
        let cat = r.catalog.as_ref().unwrap();
        let citation_specs = default_registry().iter().filter(|s| s.network == Network::Citation).count();
        assert_eq!(cat.skipped.len(), citation_specs);
        assert_eq!(cat.rankings, 23);
        assert!(r.partial());
        assert!(r.warnings.iter().any(|w| w.contains("absent.csv")));
    }

    #[test]
    fn missing_upstream_is_a_stage_error() {
        let dir = tempfile::tempdir().unwrap();
        let c = setup(dir.path(), 20);
        match run_stages(&c, &[Stage::Metrics]) {
            Err(PipelineError::Stage { stage: Stage::Metrics, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
