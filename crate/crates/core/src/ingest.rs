//! Parsing raw usage logs, citation records and article counts.
//!
//! Raw agent identifiers are replaced by keyed hashes at parse time and
//! never leave this module. Malformed lines are skipped and reported as
//! [`ParseError`]s; only an unreadable stream is fatal.
//!
//! Input schemas (delimited, header row required, empty field = absent):
//!
//! ```text
//! usage log:      session_key,agent_id,timestamp,artifact_id,issn,title,year,request_type
//! citations:      citing_journal,cited_journal,census_year,pub_year,count
//! article counts: journal,year,articles
//! ```
//!
//! The structured usage variant carries one JSON object per line with the
//! same keys as the delimited header.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{self, Read, Write};
use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, SecondsFormat, Utc};
use hmac::{Hmac, KeyInit, Mac};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::Sha256;
use thiserror::Error;

pub const USAGE_HEADER: [&str; 8] =
    ["session_key", "agent_id", "timestamp", "artifact_id", "issn", "title", "year", "request_type"];
pub const EVENTS_HEADER: [&str; 9] = [
    "event_seq",
    "session_key",
    "agent_hash",
    "timestamp",
    "artifact_id",
    "issn",
    "title",
    "year",
    "request_type",
];
pub const CITATION_HEADER: [&str; 5] = ["citing_journal", "cited_journal", "census_year", "pub_year", "count"];
pub const ARTICLE_COUNT_HEADER: [&str; 3] = ["journal", "year", "articles"];

const BATCH: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("line {line}: {reason}")]
    Header { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn csv_fatal(e: csv::Error) -> IngestError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::Io(io::Error::new(io::ErrorKind::InvalidData, format!("{other:?}"))),
    }
}

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn parse_rfc3339(s: &str) -> Option<Timestamp> {
        DateTime::parse_from_rfc3339(s).ok().map(|dt| Timestamp(dt.with_timezone(&Utc).timestamp()))
    }

    pub fn seconds(self) -> i64 {
        self.0
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match DateTime::<Utc>::from_timestamp(self.0, 0) {
            Some(dt) => f.write_str(&dt.to_rfc3339_opts(SecondsFormat::Secs, true)),
            None => write!(f, "@{}", self.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestType {
    AbstractView,
    FullText,
    Download,
    Other,
}

impl RequestType {
    pub fn as_str(self) -> &'static str {
        match self {
            RequestType::AbstractView => "abstract_view",
            RequestType::FullText => "full_text",
            RequestType::Download => "download",
            RequestType::Other => "other",
        }
    }
}

impl FromStr for RequestType {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "abstract_view" => Ok(RequestType::AbstractView),
            "full_text" => Ok(RequestType::FullText),
            "download" => Ok(RequestType::Download),
            "other" => Ok(RequestType::Other),
            _ => Err(()),
        }
    }
}

/// Bibliographic description of a requested artifact as the provider gave it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RawArtifactRef {
    pub source_id: Arc<str>,
    pub issn: Option<Arc<str>>,
    pub title: Option<Arc<str>>,
    pub year: Option<i32>,
}

impl RawArtifactRef {
    pub fn new(source_id: &str) -> Self {
        RawArtifactRef { source_id: source_id.into(), issn: None, title: None, year: None }
    }

    pub fn with_issn(mut self, issn: &str) -> Self {
        self.issn = Some(issn.into());
        self
    }

    pub fn with_title(mut self, title: &str) -> Self {
        self.title = Some(title.into());
        self
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }
}

/// Anonymized agent identifier (hex of a keyed hash).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentHash(Arc<str>);

impl AgentHash {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Wraps an already-anonymized value read back from a persisted artifact.
    pub fn from_persisted(s: &str) -> Self {
        AgentHash(s.into())
    }
}

impl fmt::Display for AgentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageEvent {
    pub event_seq: u64,
    pub session_key: Option<Arc<str>>,
    pub agent_hash: Option<AgentHash>,
    pub timestamp: Timestamp,
    pub artifact_ref: Arc<RawArtifactRef>,
    pub request_type: RequestType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationRecord {
    pub citing_journal: String,
    pub cited_journal: String,
    pub census_year: i32,
    pub pub_year: i32,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleCountRecord {
    pub journal: String,
    pub year: i32,
    pub articles: u64,
}

/// HMAC-SHA256 of the raw identifier under `salt`, truncated to 128 bits
/// and hex encoded.
pub fn anonymize(raw_agent: &str, salt: &[u8]) -> Result<AgentHash, IngestError> {
    if salt.is_empty() {
        return Err(IngestError::Config("anonymization salt must not be empty".into()));
    }
    Ok(AgentHash(keyed_hash(raw_agent, salt).into()))
}

fn keyed_hash(raw: &str, salt: &[u8]) -> String {
    let mut mac = <Hmac<Sha256> as KeyInit>::new_from_slice(salt).expect("hmac accepts any key length");
    mac.update(raw.as_bytes());
    let digest = mac.finalize().into_bytes();
    hex::encode(&digest[..16])
}

/// Salted anonymizer with a per-run memo of already-hashed agents.
pub struct Anonymizer {
    salt: Vec<u8>,
    memo: HashMap<Box<str>, AgentHash>,
}

impl Anonymizer {
    pub fn new(salt: &[u8]) -> Result<Self, IngestError> {
        if salt.is_empty() {
            return Err(IngestError::Config("anonymization salt must not be empty".into()));
        }
        Ok(Anonymizer { salt: salt.to_vec(), memo: HashMap::new() })
    }

    pub fn hash(&mut self, raw: &str) -> AgentHash {
        if let Some(h) = self.memo.get(raw) {
            return h.clone();
        }
        let h = AgentHash(keyed_hash(raw, &self.salt).into());
        self.memo.insert(raw.into(), h.clone());
        h
    }
}

/// Shares string and artifact allocations across the events of a log.
#[derive(Default)]
pub struct Interner {
    strings: HashSet<Arc<str>>,
    artifacts: HashSet<Arc<RawArtifactRef>>,
}

impl Interner {
    pub fn str(&mut self, s: &str) -> Arc<str> {
        if let Some(a) = self.strings.get(s) {
            return a.clone();
        }
        let a: Arc<str> = s.into();
        self.strings.insert(a.clone());
        a
    }

    fn opt(&mut self, s: Option<&str>) -> Option<Arc<str>> {
        s.map(|s| self.str(s))
    }

    pub fn artifact(&mut self, source_id: &str, issn: Option<&str>, title: Option<&str>, year: Option<i32>) -> Arc<RawArtifactRef> {
        let r = RawArtifactRef { source_id: self.str(source_id), issn: self.opt(issn), title: self.opt(title), year };
        if let Some(a) = self.artifacts.get(&r) {
            return a.clone();
        }
        let a = Arc::new(r);
        self.artifacts.insert(a.clone());
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseReason {
    BadHeader,
    FieldCount,
    BadTimestamp,
    MissingArtifact,
    BadYear,
    BadRequestType,
    MissingIdentity,
    BadInteger,
    YearOrder,
    BadRecord,
}

/// A recoverable per-line failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseError {
    pub line: u64,
    pub reason: ParseReason,
    pub detail: String,
}

impl ParseError {
    fn new(line: u64, reason: ParseReason, detail: impl Into<String>) -> Self {
        ParseError { line, reason, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome<T> {
    pub records: Vec<T>,
    pub errors: Vec<ParseError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogFormat {
    /// Comma-delimited with the usage header row.
    Delimited,
    /// One JSON object per line.
    JsonLines,
}

/// Field values of one usage line before anonymization and interning.
#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct RawUsageLine {
    session_key: Option<String>,
    agent_id: Option<String>,
    timestamp: Option<String>,
    artifact_id: Option<String>,
    issn: Option<String>,
    title: Option<String>,
    year: Option<serde_json::Value>,
    request_type: Option<String>,
}

struct CheckedUsage {
    session_key: Option<String>,
    agent_id: Option<String>,
    timestamp: Timestamp,
    artifact_id: String,
    issn: Option<String>,
    title: Option<String>,
    year: Option<i32>,
    request_type: RequestType,
}

fn nonempty(s: Option<String>) -> Option<String> {
    s.filter(|s| !s.is_empty())
}

fn check_usage(line: u64, raw: RawUsageLine) -> Result<CheckedUsage, ParseError> {
    let ts_text = raw.timestamp.unwrap_or_default();
    let timestamp = Timestamp::parse_rfc3339(&ts_text)
        .ok_or_else(|| ParseError::new(line, ParseReason::BadTimestamp, format!("{ts_text:?}")))?;
    let artifact_id = nonempty(raw.artifact_id)
        .ok_or_else(|| ParseError::new(line, ParseReason::MissingArtifact, "artifact_id is empty"))?;
    let year = match raw.year {
        None | Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::String(s)) if s.is_empty() => None,
        Some(serde_json::Value::String(s)) => {
            Some(s.parse::<i32>().map_err(|_| ParseError::new(line, ParseReason::BadYear, format!("{s:?}")))?)
        }
        Some(serde_json::Value::Number(n)) => Some(
            n.as_i64()
                .and_then(|v| i32::try_from(v).ok())
                .ok_or_else(|| ParseError::new(line, ParseReason::BadYear, n.to_string()))?,
        ),
        Some(other) => return Err(ParseError::new(line, ParseReason::BadYear, other.to_string())),
    };
    let rt = raw.request_type.unwrap_or_default();
    let request_type = rt
        .parse::<RequestType>()
        .map_err(|_| ParseError::new(line, ParseReason::BadRequestType, format!("{rt:?}")))?;
    let session_key = nonempty(raw.session_key);
    let agent_id = nonempty(raw.agent_id);
    if session_key.is_none() && agent_id.is_none() {
        return Err(ParseError::new(line, ParseReason::MissingIdentity, "neither session_key nor agent_id"));
    }
    Ok(CheckedUsage {
        session_key,
        agent_id,
        timestamp,
        artifact_id,
        issn: nonempty(raw.issn),
        title: nonempty(raw.title),
        year,
        request_type,
    })
}

fn raw_from_record(rec: &csv::StringRecord) -> RawUsageLine {
    let f = |i: usize| Some(rec[i].to_owned());
    RawUsageLine {
        session_key: f(0),
        agent_id: f(1),
        timestamp: f(2),
        artifact_id: f(3),
        issn: f(4),
        title: f(5),
        year: Some(serde_json::Value::String(rec[6].to_owned())),
        request_type: f(7),
    }
}

/// Parses a usage log. Every well-formed line yields one event, in input
/// order, with `event_seq` counting accepted lines from zero.
pub fn parse_usage_log<R: Read>(
    input: R,
    format: LogFormat,
    anonymizer: &mut Anonymizer,
) -> Result<ParseOutcome<UsageEvent>, IngestError> {
    let mut interner = Interner::default();
    let mut out = ParseOutcome { records: Vec::new(), errors: Vec::new() };
    let mut finish = |batch: Vec<Result<CheckedUsage, ParseError>>, out: &mut ParseOutcome<UsageEvent>| {
        for item in batch {
            match item {
                Ok(c) => {
                    let seq = out.records.len() as u64;
                    out.records.push(UsageEvent {
                        event_seq: seq,
                        session_key: c.session_key.as_deref().map(|s| interner.str(s)),
                        agent_hash: c.agent_id.as_deref().map(|a| anonymizer.hash(a)),
                        timestamp: c.timestamp,
                        artifact_ref: interner.artifact(&c.artifact_id, c.issn.as_deref(), c.title.as_deref(), c.year),
                        request_type: c.request_type,
                    });
                }
                Err(e) => out.errors.push(e),
            }
        }
    };

    match format {
        LogFormat::Delimited => {
            let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
            let mut rec = csv::StringRecord::new();
            if !rdr.read_record(&mut rec).map_err(csv_fatal)? {
                return Ok(out);
            }
            if rec.iter().collect::<Vec<_>>() != USAGE_HEADER {
                return Err(IngestError::Header { line: 1, reason: format!("expected header {}", USAGE_HEADER.join(",")) });
            }
            loop {
                let mut batch: Vec<(u64, Result<csv::StringRecord, ParseError>)> = Vec::with_capacity(BATCH);
                while batch.len() < BATCH {
                    match rdr.read_record(&mut rec) {
                        Ok(true) => {
                            let line = rec.position().map_or(0, |p| p.line());
                            batch.push((line, Ok(rec.clone())));
                        }
                        Ok(false) => break,
                        Err(e) => {
                            let line = e.position().map_or(0, |p| p.line());
                            if let csv::ErrorKind::Io(_) = e.kind() {
                                return Err(csv_fatal(e));
                            }
                            batch.push((line, Err(ParseError::new(line, ParseReason::BadRecord, e.to_string()))));
                        }
                    }
                }
                if batch.is_empty() {
                    break;
                }
                let checked: Vec<_> = batch
                    .into_par_iter()
                    .map(|(line, r)| {
                        let rec = r?;
                        if rec.len() != USAGE_HEADER.len() {
                            return Err(ParseError::new(
                                line,
                                ParseReason::FieldCount,
                                format!("expected {} fields, got {}", USAGE_HEADER.len(), rec.len()),
                            ));
                        }
                        check_usage(line, raw_from_record(&rec))
                    })
                    .collect();
                finish(checked, &mut out);
            }
        }
        LogFormat::JsonLines => {
            let mut text = String::new();
            io::BufReader::new(input).read_to_string(&mut text)?;
            let lines: Vec<(u64, &str)> =
                text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l)).filter(|(_, l)| !l.trim().is_empty()).collect();
            for chunk in lines.chunks(BATCH) {
                let checked: Vec<_> = chunk
                    .par_iter()
                    .map(|&(line, l)| {
                        let raw: RawUsageLine = serde_json::from_str(l)
                            .map_err(|e| ParseError::new(line, ParseReason::BadRecord, e.to_string()))?;
                        check_usage(line, raw)
                    })
                    .collect();
                finish(checked, &mut out);
            }
        }
    }
    Ok(out)
}

/// Writes one JSON object per parse error.
pub fn write_parse_errors<W: Write>(mut out: W, errors: &[ParseError]) -> io::Result<()> {
    for e in errors {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn opt_str(s: &Option<Arc<str>>) -> &str {
    s.as_deref().unwrap_or("")
}

/// Writes the canonical, anonymized event file (`EVENTS_HEADER`).
pub fn write_events<W: Write>(out: W, events: &[UsageEvent]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(io::BufWriter::with_capacity(1 << 20, out));
    w.write_record(EVENTS_HEADER).map_err(csv_fatal)?;
    for e in events {
        let seq = e.event_seq.to_string();
        let year = e.artifact_ref.year.map(|y| y.to_string()).unwrap_or_default();
        let ts = e.timestamp.to_string();
        w.write_record([
            seq.as_str(),
            opt_str(&e.session_key),
            e.agent_hash.as_ref().map_or("", |h| h.as_str()),
            ts.as_str(),
            &e.artifact_ref.source_id,
            opt_str(&e.artifact_ref.issn),
            opt_str(&e.artifact_ref.title),
            year.as_str(),
            e.request_type.as_str(),
        ])
        .map_err(csv_fatal)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an event file written by [`write_events`]. Any malformed line is
/// fatal here, since the file is an internal artifact.
pub fn read_events<R: Read>(input: R) -> Result<Vec<UsageEvent>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(io::BufReader::with_capacity(1 << 20, input));
    let mut rec = csv::StringRecord::new();
    if !rdr.read_record(&mut rec).map_err(csv_fatal)? {
        return Ok(Vec::new());
    }
    if rec.iter().collect::<Vec<_>>() != EVENTS_HEADER {
        return Err(IngestError::Header { line: 1, reason: format!("expected header {}", EVENTS_HEADER.join(",")) });
    }
    let mut interner = Interner::default();
    let mut agents: HashSet<Arc<str>> = HashSet::new();
    let mut events = Vec::new();
    while rdr.read_record(&mut rec).map_err(csv_fatal)? {
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| IngestError::Header { line, reason: format!("bad {what}") };
        if rec.len() != EVENTS_HEADER.len() {
            return Err(bad("field count"));
        }
        let event_seq = rec[0].parse().map_err(|_| bad("event_seq"))?;
        let session_key = (!rec[1].is_empty()).then(|| interner.str(&rec[1]));
        let agent_hash = (!rec[2].is_empty()).then(|| {
            let h = match agents.get(&rec[2]) {
                Some(a) => a.clone(),
                None => {
                    let a: Arc<str> = rec[2].into();
                    agents.insert(a.clone());
                    a
                }
            };
            AgentHash(h)
        });
        let timestamp = Timestamp::parse_rfc3339(&rec[3]).ok_or_else(|| bad("timestamp"))?;
        let year = if rec[7].is_empty() { None } else { Some(rec[7].parse().map_err(|_| bad("year"))?) };
        let artifact_ref = interner.artifact(
            &rec[4],
            (!rec[5].is_empty()).then_some(&rec[5]),
            (!rec[6].is_empty()).then_some(&rec[6]),
            year,
        );
        let request_type = rec[8].parse().map_err(|_| bad("request_type"))?;
        events.push(UsageEvent { event_seq, session_key, agent_hash, timestamp, artifact_ref, request_type });
    }
    Ok(events)
}

fn read_table<R: Read, T: Send>(
    input: R,
    header: &[&str],
    convert: impl Fn(u64, &csv::StringRecord) -> Result<T, ParseError> + Sync,
) -> Result<ParseOutcome<T>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut rows = Vec::new();
    let mut rec = csv::StringRecord::new();
    if !rdr.read_record(&mut rec).map_err(csv_fatal)? {
        return Ok(ParseOutcome { records: Vec::new(), errors: Vec::new() });
    }
    if rec.iter().collect::<Vec<_>>() != header {
        return Err(IngestError::Header { line: 1, reason: format!("expected header {}", header.join(",")) });
    }
    loop {
        match rdr.read_record(&mut rec) {
            Ok(true) => rows.push((rec.position().map_or(0, |p| p.line()), Ok(rec.clone()))),
            Ok(false) => break,
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(csv_fatal(e));
                }
                let line = e.position().map_or(0, |p| p.line());
                rows.push((line, Err(ParseError::new(line, ParseReason::BadRecord, e.to_string()))));
            }
        }
    }
    let results: Vec<Result<T, ParseError>> = rows
        .into_par_iter()
        .map(|(line, r)| {
            let rec = r?;
            if rec.len() != header.len() {
                return Err(ParseError::new(
                    line,
                    ParseReason::FieldCount,
                    format!("expected {} fields, got {}", header.len(), rec.len()),
                ));
            }
            convert(line, &rec)
        })
        .collect();
    let mut out = ParseOutcome { records: Vec::new(), errors: Vec::new() };
    for r in results {
        match r {
            Ok(t) => out.records.push(t),
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

fn int_field<T: FromStr>(line: u64, name: &str, s: &str, reason: ParseReason) -> Result<T, ParseError> {
    s.parse().map_err(|_| ParseError::new(line, reason, format!("{name}={s:?}")))
}

fn nonempty_field(line: u64, name: &str, s: &str) -> Result<String, ParseError> {
    if s.is_empty() {
        Err(ParseError::new(line, ParseReason::BadRecord, format!("{name} is empty")))
    } else {
        Ok(s.to_owned())
    }
}

pub fn parse_citation_records<R: Read>(input: R) -> Result<ParseOutcome<CitationRecord>, IngestError> {
    read_table(input, &CITATION_HEADER, |line, rec| {
        let census_year: i32 = int_field(line, "census_year", &rec[2], ParseReason::BadYear)?;
        let pub_year: i32 = int_field(line, "pub_year", &rec[3], ParseReason::BadYear)?;
        if pub_year > census_year {
            return Err(ParseError::new(
                line,
                ParseReason::YearOrder,
                format!("pub_year {pub_year} after census_year {census_year}"),
            ));
        }
        Ok(CitationRecord {
            citing_journal: nonempty_field(line, "citing_journal", &rec[0])?,
            cited_journal: nonempty_field(line, "cited_journal", &rec[1])?,
            census_year,
            pub_year,
            count: int_field(line, "count", &rec[4], ParseReason::BadInteger)?,
        })
    })
}

pub fn parse_article_counts<R: Read>(input: R) -> Result<ParseOutcome<ArticleCountRecord>, IngestError> {
    read_table(input, &ARTICLE_COUNT_HEADER, |line, rec| {
        Ok(ArticleCountRecord {
            journal: nonempty_field(line, "journal", &rec[0])?,
            year: int_field(line, "year", &rec[1], ParseReason::BadYear)?,
            articles: int_field(line, "articles", &rec[2], ParseReason::BadInteger)?,
        })
    })
}

pub fn write_citation_records<W: Write>(out: W, records: &[CitationRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CITATION_HEADER).map_err(csv_fatal)?;
    for r in records {
        w.write_record([
            r.citing_journal.as_str(),
            r.cited_journal.as_str(),
            &r.census_year.to_string(),
            &r.pub_year.to_string(),
            &r.count.to_string(),
        ])
        .map_err(csv_fatal)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_article_counts<W: Write>(out: W, records: &[ArticleCountRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ARTICLE_COUNT_HEADER).map_err(csv_fatal)?;
    for r in records {
        w.write_record([r.journal.as_str(), &r.year.to_string(), &r.articles.to_string()]).map_err(csv_fatal)?;
    }
    w.flush()?;
    Ok(())
}
