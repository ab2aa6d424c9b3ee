//! Seeded synthetic corpora with planted structure and ground truth.
//!
//! Journals are split into communities. Human sessions draw each request
//! from their home community, or from elsewhere with probability
//! `cross_community_prob`; robot sessions are long, fast and draw uniformly.
//! Citations favour the citing journal's community in the same way. Ground
//! truth (journal communities, robot flag per session) is written next to
//! the corpus for test assertions.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::JournalId;
use crate::identify::{CanonicalJournal, Registry};
use crate::ingest::{RawArtifactRef, RequestType, Timestamp, ARTICLE_COUNT_HEADER, CITATION_HEADER, USAGE_HEADER};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub seed: u64,
    pub communities: usize,
    pub journals_per_community: usize,
    pub articles_per_journal: usize,
    pub sessions: usize,
    /// Inclusive range of requests in a human session.
    pub human_events: (usize, usize),
    /// Inclusive range of seconds between human requests.
    pub human_gap_secs: (i64, i64),
    /// Chance that a human request leaves the session's home community.
    pub cross_community_prob: f64,
    pub bot_fraction: f64,
    pub bot_events: (usize, usize),
    /// Chance that a robot request lands in the same second as the last;
    /// otherwise one second later.
    pub bot_zero_gap_prob: f64,
    /// Share of sessions carrying an explicit session key.
    pub explicit_key_fraction: f64,
    /// Sessions attributed to each agent, a day apart.
    pub sessions_per_agent: usize,
    /// Chance that a request repeats the previous article.
    pub repeat_prob: f64,
    /// Chance that a request carries the journal ISSN.
    pub issn_prob: f64,
    /// Chance that a request describes its journal with a variant title.
    pub title_variant_prob: f64,
    pub citation_records_per_journal: usize,
    pub citation_cross_prob: f64,
    pub self_citation_prob: f64,
    pub census_year: i32,
    /// Chance that one window year's article count is missing for a journal.
    pub missing_count_prob: f64,
    /// Unix seconds of the first session.
    pub start: i64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            seed: 1,
            communities: 2,
            journals_per_community: 20,
            articles_per_journal: 20,
            sessions: 10_000,
            human_events: (2, 30),
            human_gap_secs: (5, 300),
            cross_community_prob: 0.05,
            bot_fraction: 0.05,
            bot_events: (200, 400),
            bot_zero_gap_prob: 0.7,
            explicit_key_fraction: 0.5,
            sessions_per_agent: 3,
            repeat_prob: 0.1,
            issn_prob: 0.6,
            title_variant_prob: 0.2,
            citation_records_per_journal: 30,
            citation_cross_prob: 0.2,
            self_citation_prob: 0.05,
            census_year: 2005,
            missing_count_prob: 0.0,
            start: 1_104_537_600,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let probs = [
            ("cross_community_prob", self.cross_community_prob),
            ("bot_fraction", self.bot_fraction),
            ("bot_zero_gap_prob", self.bot_zero_gap_prob),
            ("explicit_key_fraction", self.explicit_key_fraction),
            ("repeat_prob", self.repeat_prob),
            ("issn_prob", self.issn_prob),
            ("title_variant_prob", self.title_variant_prob),
            ("citation_cross_prob", self.citation_cross_prob),
            ("self_citation_prob", self.self_citation_prob),
            ("missing_count_prob", self.missing_count_prob),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(SynthError::Spec(format!("{name} = {p} is not a probability")));
            }
        }
        let counts = [
            ("communities", self.communities),
            ("journals_per_community", self.journals_per_community),
            ("articles_per_journal", self.articles_per_journal),
            ("sessions_per_agent", self.sessions_per_agent),
            ("human_events.0", self.human_events.0),
            ("bot_events.0", self.bot_events.0),
        ];
        for (name, c) in counts {
            if c == 0 {
                return Err(SynthError::Spec(format!("{name} must be positive")));
            }
        }
        if self.human_events.0 > self.human_events.1
            || self.bot_events.0 > self.bot_events.1
            || self.human_gap_secs.0 > self.human_gap_secs.1
            || self.human_gap_secs.0 < 0
        {
            return Err(SynthError::Spec("empty range".into()));
        }
        if self.communities * self.journals_per_community > TITLE_WORDS.len().pow(2) {
            return Err(SynthError::Spec("too many journals for distinct titles".into()));
        }
        Ok(())
    }

    fn journal_count(&self) -> usize {
        self.communities * self.journals_per_community
    }
}

/// Title words: distinct four-letter prefixes, pairwise at least three
/// edits apart. The length is prime so that titles built by [`title_of`]
/// differ in at least two words.
const TITLE_WORDS: [&str; 113] = [
    "quantum", "botany", "optics", "genetics", "ecology", "topology", "algebra", "calculus", "robotics",
    "acoustics", "hydrology", "virology", "pathology", "neurology", "cardiology", "dermatology", "immunology",
    "pharmacy", "forestry", "fisheries", "agronomy", "nutrition", "metallurgy", "ceramics", "polymers",
    "catalysis", "photonics", "plasmas", "turbulence", "combustion", "seismology", "volcanology", "glaciology",
    "oceanography", "meteorology", "climatology", "cosmology", "galaxies", "particles", "nuclear", "magnetism",
    "crystals", "minerals", "sediments", "paleontology", "archaeology", "linguistics", "semantics", "phonetics",
    "economics", "finance", "accounting", "marketing", "logistics", "sociology", "demography", "criminology",
    "psychology", "cognition", "education", "pedagogy", "philosophy", "ethics", "history", "musicology",
    "urbanism", "planning", "transport", "aviation", "maritime", "railways", "energetics", "batteries",
    "biofuels", "enzymes", "proteins", "lipids", "membranes", "vaccines", "antibodies", "parasites", "bacteria",
    "viruses", "insects", "primates", "rodents", "reptiles", "amphibians", "wetlands", "deserts", "tundra",
    "savanna", "estuaries", "mangroves", "lichens", "mosses", "orchids", "grasses", "statistics", "inference",
    "networks", "databases", "compilers", "cryptography", "graphics", "imaging", "sensors", "antennas",
    "lasers", "microwaves", "circuits", "welding", "tribology",
];

const TITLE_LEADS: [&str; 4] = ["Journal of", "Annals of", "Advances in", "Reviews of"];

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Title `i`: words `a`, `b` and `(a + 3b) mod W`, so two distinct indices
/// never share more than one of the three words.
fn title_words(i: usize) -> [&'static str; 3] {
    let w = TITLE_WORDS.len();
    let (a, b) = (i % w, i / w % w);
    [TITLE_WORDS[a], TITLE_WORDS[b], TITLE_WORDS[(a + 3 * b) % w]]
}

fn title_of(i: usize) -> String {
    let words = title_words(i);
    let lead = TITLE_LEADS[(i / 7) % TITLE_LEADS.len()];
    format!("{lead} {}", words.map(capitalize).join(" "))
}

fn abbreviation_of(i: usize) -> String {
    let words = title_words(i);
    let lead = TITLE_LEADS[(i / 7) % TITLE_LEADS.len()].split(' ').next().unwrap_or("");
    let mut parts = vec![format!("{}.", &lead[..lead.len().min(4)])];
    parts.extend(words.iter().map(|w| format!("{}.", capitalize(&w[..4]))));
    parts.join(" ")
}

/// Valid ISSN from seven payload digits.
pub fn issn_from_digits(digits: u32) -> String {
    let s = format!("{:07}", digits % 10_000_000);
    let sum: u32 = s.chars().enumerate().map(|(i, c)| c.to_digit(10).unwrap_or(0) * (8 - i as u32)).sum();
    let check = (11 - sum % 11) % 11;
    let c = if check == 10 { 'X' } else { char::from_digit(check, 10).unwrap_or('0') };
    format!("{}-{}{}", &s[..4], &s[4..], c)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthJournal {
    pub id: JournalId,
    pub community: usize,
    pub title: String,
    pub issn: String,
    pub abbreviation: String,
}

pub fn synth_journals(spec: &SynthSpec) -> Vec<SynthJournal> {
    (0..spec.journal_count())
        .map(|i| SynthJournal {
            id: JournalId::new(format!("J{i:05}")),
            community: i / spec.journals_per_community,
            title: title_of(i),
            issn: issn_from_digits((i as u32).wrapping_mul(7919).wrapping_add(1_234_567) % 10_000_000),
            abbreviation: abbreviation_of(i),
        })
        .collect()
}

/// Registry of the synthetic journals with their abbreviations as
/// equivalences.
pub fn synth_registry(journals: &[SynthJournal]) -> Registry {
    let canon = journals
        .iter()
        .map(|j| CanonicalJournal::new(j.id.clone(), &j.title, [&j.issn]).expect("generated ISSNs are valid"))
        .collect();
    let eq = journals.iter().map(|j| (j.abbreviation.clone(), j.id.clone()));
    Registry::new(canon, eq).expect("generated registry is consistent")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Abbreviation,
    Punctuation,
    CharEdits(u8),
    IssnFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantCase {
    pub raw: RawArtifactRef,
    pub truth: JournalId,
    pub kind: VariantKind,
}

fn punctuation_variant(title: &str, rng: &mut impl Rng) -> String {
    let mut out = String::new();
    for (i, word) in title.split(' ').enumerate() {
        if i > 0 {
            out.push_str([" ", " - ", ", ", ": ", "  "][rng.random_range(0..5)]);
        }
        match rng.random_range(0..3) {
            0 => out.push_str(&word.to_uppercase()),
            1 => out.push_str(&word.to_lowercase()),
            _ => out.push_str(word),
        }
    }
    if rng.random_bool(0.5) {
        out.push('.');
    }
    out
}

fn char_edits(title: &str, edits: u8, rng: &mut impl Rng) -> String {
    let mut chars: Vec<char> = title.chars().collect();
    for _ in 0..edits {
        let letters: Vec<usize> = (0..chars.len()).filter(|&i| chars[i].is_alphabetic()).collect();
        let at = letters[rng.random_range(0..letters.len())];
        let fresh = loop {
            let c = char::from(b'a' + rng.random_range(0..26u8));
            if c != chars[at].to_ascii_lowercase() {
                break c;
            }
        };
        match rng.random_range(0..3) {
            0 => chars[at] = fresh,
            1 => {
                chars.remove(at);
            }
            _ => chars.insert(at, fresh),
        }
    }
    chars.into_iter().collect()
}

fn issn_variant(issn: &str, rng: &mut impl Rng) -> String {
    match rng.random_range(0..3) {
        0 => issn.replace('-', ""),
        1 => issn.to_lowercase(),
        _ => format!(" {issn} "),
    }
}

/// Perturbed journal descriptions with known answers: abbreviations,
/// punctuation and case changes, one or two character edits (all without
/// ISSN), and reformatted ISSNs without title.
pub fn variant_fixture(journals: &[SynthJournal], n: usize, seed: u64) -> Vec<VariantCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let j = &journals[rng.random_range(0..journals.len())];
            let source = format!("v{i}");
            let (raw, kind) = match i % 5 {
                0 => (RawArtifactRef::new(&source).with_title(&j.abbreviation), VariantKind::Abbreviation),
                1 => (RawArtifactRef::new(&source).with_title(&punctuation_variant(&j.title, &mut rng)), VariantKind::Punctuation),
                2 => (RawArtifactRef::new(&source).with_title(&char_edits(&j.title, 1, &mut rng)), VariantKind::CharEdits(1)),
                3 => (RawArtifactRef::new(&source).with_title(&char_edits(&j.title, 2, &mut rng)), VariantKind::CharEdits(2)),
                _ => (RawArtifactRef::new(&source).with_issn(&issn_variant(&j.issn, &mut rng)), VariantKind::IssnFormat),
            };
            VariantCase { raw, truth: j.id.clone(), kind }
        })
        .collect()
}

/// File layout of a generated corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub usage: PathBuf,
    pub citations: PathBuf,
    pub article_counts: PathBuf,
    pub registry: PathBuf,
    pub equivalences: PathBuf,
    pub truth_journals: PathBuf,
    pub truth_sessions: PathBuf,
}

impl CorpusPaths {
    pub fn in_dir(dir: &Path) -> Self {
        CorpusPaths {
            usage: dir.join("usage.csv"),
            citations: dir.join("citations.csv"),
            article_counts: dir.join("article_counts.csv"),
            registry: dir.join("registry.csv"),
            equivalences: dir.join("equivalences.csv"),
            truth_journals: dir.join("truth_journals.csv"),
            truth_sessions: dir.join("truth_sessions.csv"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub journals: usize,
    pub sessions: usize,
    pub bot_sessions: usize,
    pub events: u64,
    pub citation_records: usize,
    pub article_count_records: usize,
}

/// Ground truth of one generated session. `first_event_seq` is the intake
/// ordinal of its first request in the usage log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTruth {
    pub session: usize,
    pub first_event_seq: u64,
    pub session_key: String,
    pub agent_id: String,
    pub is_bot: bool,
    pub community: Option<usize>,
    pub events: usize,
}

fn agent_name(a: usize) -> String {
    format!("198.{}.{}.{}", (a >> 16) & 255, (a >> 8) & 255, a & 255)
}

struct Picker<'a> {
    spec: &'a SynthSpec,
    n: usize,
}

impl Picker<'_> {
    fn home(&self, c: usize, rng: &mut impl Rng) -> usize {
        let jpc = self.spec.journals_per_community;
        c * jpc + rng.random_range(0..jpc)
    }

    fn elsewhere(&self, c: usize, rng: &mut impl Rng) -> usize {
        let jpc = self.spec.journals_per_community;
        if self.spec.communities < 2 {
            return self.home(c, rng);
        }
        let r = rng.random_range(0..self.n - jpc);
        if r < c * jpc {
            r
        } else {
            r + jpc
        }
    }
}

fn describe(j: &SynthJournal, spec: &SynthSpec, rng: &mut impl Rng) -> (String, String) {
    let issn = if rng.random_bool(spec.issn_prob) {
        if rng.random_bool(0.2) {
            j.issn.replace('-', "")
        } else {
            j.issn.clone()
        }
    } else {
        String::new()
    };
    let title = if rng.random_bool(spec.title_variant_prob) {
        if rng.random_bool(0.5) {
            j.abbreviation.clone()
        } else {
            punctuation_variant(&j.title, rng)
        }
    } else {
        j.title.clone()
    };
    (issn, title)
}

fn write_usage<W: Write>(
    spec: &SynthSpec,
    journals: &[SynthJournal],
    out: W,
    truth: &mut csv::Writer<impl Write>,
    rng: &mut ChaCha8Rng,
) -> Result<(u64, usize), SynthError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(USAGE_HEADER)?;
    truth.write_record(["session", "first_event_seq", "session_key", "agent_id", "is_bot", "community", "events"])?;
    let picker = Picker { spec, n: journals.len() };
    let agents = spec.sessions.div_ceil(spec.sessions_per_agent).max(1);
    let mut seq = 0u64;
    let mut bots = 0;
    for i in 0..spec.sessions {
        let agent = agent_name(i % agents);
        let day = (i / agents) as i64;
        let key = if rng.random_bool(spec.explicit_key_fraction) { format!("S{i:08}") } else { String::new() };
        let is_bot = rng.random_bool(spec.bot_fraction);
        let community = rng.random_range(0..spec.communities);
        let len = if is_bot {
            rng.random_range(spec.bot_events.0..=spec.bot_events.1)
        } else {
            rng.random_range(spec.human_events.0..=spec.human_events.1)
        };
        bots += usize::from(is_bot);
        truth.write_record([
            i.to_string(),
            seq.to_string(),
            key.clone(),
            agent.clone(),
            is_bot.to_string(),
            if is_bot { String::new() } else { community.to_string() },
            len.to_string(),
        ])?;

        let mut t = spec.start + day * 86_400 + rng.random_range(0..3600);
        let mut prev: Option<(usize, usize)> = None;
        for e in 0..len {
            if e > 0 {
                t += if is_bot {
                    i64::from(!rng.random_bool(spec.bot_zero_gap_prob))
                } else {
                    rng.random_range(spec.human_gap_secs.0..=spec.human_gap_secs.1)
                };
            }
            let (jix, art) = match prev {
                Some(p) if rng.random_bool(spec.repeat_prob) => p,
                _ => {
                    let j = if is_bot {
                        rng.random_range(0..journals.len())
                    } else if rng.random_bool(spec.cross_community_prob) {
                        picker.elsewhere(community, rng)
                    } else {
                        picker.home(community, rng)
                    };
                    (j, rng.random_range(0..spec.articles_per_journal))
                }
            };
            prev = Some((jix, art));
            let j = &journals[jix];
            let (issn, title) = describe(j, spec, rng);
            let year = spec.census_year - 1 - (art % 3) as i32;
            let rt = [RequestType::AbstractView, RequestType::FullText, RequestType::Download, RequestType::Other]
                [rng.random_range(0..4)];
            w.write_record([
                key.as_str(),
                agent.as_str(),
                &Timestamp(t).to_string(),
                &format!("{}-{art:03}", j.id),
                &issn,
                &title,
                &year.to_string(),
                rt.as_str(),
            ])?;
            seq += 1;
        }
    }
    w.flush()?;
    Ok((seq, bots))
}

/// Writes the usage log, citation records, article counts, registry,
/// equivalence table and ground truth into `dir`.
pub fn generate_corpus(spec: &SynthSpec, dir: &Path) -> Result<CorpusSummary, SynthError> {
    spec.validate()?;
    fs::create_dir_all(dir)?;
    let paths = CorpusPaths::in_dir(dir);
    let journals = synth_journals(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths.registry)?));
    w.write_record(["journal_id", "canonical_title", "issn_list"])?;
    for j in &journals {
        w.write_record([j.id.as_str(), &j.title, &j.issn])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths.equivalences)?));
    w.write_record(["variant_title_or_issn", "journal_id"])?;
    for j in &journals {
        w.write_record([j.abbreviation.as_str(), j.id.as_str()])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths.truth_journals)?));
    w.write_record(["journal_id", "community", "title", "issn"])?;
    for j in &journals {
        w.write_record([j.id.as_str(), &j.community.to_string(), &j.title, &j.issn])?;
    }
    w.flush()?;

    let mut truth = csv::Writer::from_writer(BufWriter::new(File::create(&paths.truth_sessions)?));
    let usage = BufWriter::with_capacity(1 << 20, File::create(&paths.usage)?);
    let (events, bot_sessions) = write_usage(spec, &journals, usage, &mut truth, &mut rng)?;
    truth.flush()?;

    let picker = Picker { spec, n: journals.len() };
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths.citations)?));
    w.write_record(CITATION_HEADER)?;
    let mut citation_records = 0;
    for (i, j) in journals.iter().enumerate() {
        for _ in 0..spec.citation_records_per_journal {
            let target = if rng.random_bool(spec.self_citation_prob) {
                i
            } else if rng.random_bool(spec.citation_cross_prob) {
                picker.elsewhere(j.community, &mut rng)
            } else {
                picker.home(j.community, &mut rng)
            };
            let t = &journals[target];
            let cited = match rng.random_range(0..10) {
                0 => t.issn.clone(),
                1 => t.title.clone(),
                _ => t.id.to_string(),
            };
            let pub_year = spec.census_year - rng.random_range(1..=3);
            let count = rng.random_range(1..=20u32);
            w.write_record([
                j.id.as_str(),
                &cited,
                &spec.census_year.to_string(),
                &pub_year.to_string(),
                &count.to_string(),
            ])?;
            citation_records += 1;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(&paths.article_counts)?));
    w.write_record(ARTICLE_COUNT_HEADER)?;
    let mut article_count_records = 0;
    for j in &journals {
        let skip = rng.random_bool(spec.missing_count_prob).then(|| spec.census_year - rng.random_range(1..=2));
        for year in spec.census_year - 3..spec.census_year {
            let n = rng.random_range(5..=60u32);
            if Some(year) != skip {
                w.write_record([j.id.as_str(), &year.to_string(), &n.to_string()])?;
                article_count_records += 1;
            }
        }
    }
    w.flush()?;

    Ok(CorpusSummary {
        journals: journals.len(),
        sessions: spec.sessions,
        bot_sessions,
        events,
        citation_records,
        article_count_records,
    })
}

/// Reads `truth_sessions.csv`.
pub fn read_session_truth(path: &Path) -> Result<Vec<SessionTruth>, SynthError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| rec[i].parse::<u64>().map_err(|_| SynthError::Spec(format!("bad truth field {:?}", &rec[i])));
        out.push(SessionTruth {
            session: num(0)? as usize,
            first_event_seq: num(1)?,
            session_key: rec[2].to_owned(),
            agent_id: rec[3].to_owned(),
            is_bot: &rec[4] == "true",
            community: if rec[5].is_empty() { None } else { Some(num(5)? as usize) },
            events: num(6)? as usize,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identify::{normalize_title, validate_issn};
    use std::collections::BTreeSet;

    #[test]
    fn titles_are_distinct_and_issns_valid() {
        let spec = SynthSpec { communities: 10, journals_per_community: 500, ..Default::default() };
        let js = synth_journals(&spec);
        let titles: BTreeSet<String> = js.iter().map(|j| normalize_title(&j.title)).collect();
        let abbrevs: BTreeSet<String> = js.iter().map(|j| normalize_title(&j.abbreviation)).collect();
        let issns: BTreeSet<&str> = js.iter().map(|j| j.issn.as_str()).collect();
        assert_eq!(titles.len(), 5000);
        assert_eq!(abbrevs.len(), 5000);
        assert_eq!(issns.len(), 5000);
        assert!(js.iter().all(|j| validate_issn(&j.issn)));
    }

    #[test]
    fn title_words_overlap_in_at_most_one_position() {
        for i in 0..400 {
            for k in i + 1..400 {
                let (a, b) = (title_words(i), title_words(k));
                assert!((0..3).filter(|&p| a[p] == b[p]).count() <= 1);
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(SynthSpec::default().validate().is_ok());
        assert!(SynthSpec { bot_fraction: 1.5, ..Default::default() }.validate().is_err());
        assert!(SynthSpec { communities: 0, ..Default::default() }.validate().is_err());
        assert!(SynthSpec { human_events: (5, 2), ..Default::default() }.validate().is_err());
    }

    #[test]
    fn corpus_is_seeded() {
        let spec = SynthSpec { sessions: 50, ..Default::default() };
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let sa = generate_corpus(&spec, a.path()).unwrap();
        let sb = generate_corpus(&spec, b.path()).unwrap();
        assert_eq!(sa, sb);
        for f in ["usage.csv", "citations.csv", "article_counts.csv", "truth_sessions.csv"] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
        }
        let truth = read_session_truth(&a.path().join("truth_sessions.csv")).unwrap();
        assert_eq!(truth.len(), 50);
        assert_eq!(truth.iter().map(|t| t.events as u64).sum::<u64>(), sa.events);
    }
}
