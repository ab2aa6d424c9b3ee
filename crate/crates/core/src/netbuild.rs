//! Building the journal usage network from session co-occurrence and the
//! journal citation network from citation records.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{JournalId, WeightedDigraph};
use crate::ingest::{CitationRecord, RawArtifactRef};
use crate::sessionize::{Classification, Session};

pub const DEFAULT_SESSION_CAP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UsageOptions {
    /// Sessions touching more distinct journals than this are skipped.
    pub session_cap: usize,
    /// Weight a pair by the product of per-session request counts instead
    /// of counting it once per session.
    pub frequency_weighted: bool,
}

impl Default for UsageOptions {
    fn default() -> Self {
        UsageOptions { session_cap: DEFAULT_SESSION_CAP, frequency_weighted: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Robot,
    Unclassified,
    OverCap,
    NoResolvedJournal,
    OutOfWindow,
    SelfCitation,
    ZeroCount,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    /// Sessions (usage) or records (citation) that contributed.
    pub sessions_used: u64,
    pub sessions_skipped: BTreeMap<SkipReason, u64>,
    /// Resolved events (usage) or citations (citation) that contributed.
    pub events_used: u64,
    pub distinct_journals: u64,
}

impl BuildStats {
    fn skip(&mut self, reason: SkipReason, n: u64) {
        if n > 0 {
            *self.sessions_skipped.entry(reason).or_insert(0) += n;
        }
    }

    pub fn skipped(&self, reason: SkipReason) -> u64 {
        self.sessions_skipped.get(&reason).copied().unwrap_or(0)
    }
}

/// Distinct resolved journals of one session with their request counts,
/// sorted by journal id.
pub fn session_journals<F>(session: &Session, lookup: &F) -> Vec<(JournalId, u64)>
where
    F: Fn(&RawArtifactRef) -> Option<JournalId>,
{
    let mut ids: Vec<JournalId> = session.events.iter().filter_map(|e| lookup(&e.artifact_ref)).collect();
    ids.sort_unstable();
    let mut out: Vec<(JournalId, u64)> = Vec::new();
    for id in ids {
        match out.last_mut() {
            Some((last, n)) if *last == id => *n += 1,
            _ => out.push((id, 1)),
        }
    }
    out
}

/// Co-occurrence network over human sessions. Each session contributes its
/// set of distinct resolved journals; every unordered pair in the set gains
/// weight 1 (or the product of request counts when frequency weighted).
pub fn build_usage_network<F>(sessions: &[Session], lookup: &F, opts: &UsageOptions) -> (WeightedDigraph, BuildStats)
where
    F: Fn(&RawArtifactRef) -> Option<JournalId> + Sync,
{
    let sets: Vec<Option<Vec<(JournalId, u64)>>> = sessions
        .par_iter()
        .map(|s| (s.classification == Classification::Human).then(|| session_journals(s, lookup)))
        .collect();

    let mut stats = BuildStats::default();
    let mut used: Vec<&[(JournalId, u64)]> = Vec::new();
    for (s, set) in sessions.iter().zip(&sets) {
        match (s.classification, set) {
            (Classification::Robot, _) => stats.skip(SkipReason::Robot, 1),
            (Classification::Undecided, _) => stats.skip(SkipReason::Unclassified, 1),
            (_, Some(set)) if set.is_empty() => stats.skip(SkipReason::NoResolvedJournal, 1),
            (_, Some(set)) if set.len() > opts.session_cap => stats.skip(SkipReason::OverCap, 1),
            (_, Some(set)) => {
                stats.sessions_used += 1;
                stats.events_used += set.iter().map(|(_, n)| n).sum::<u64>();
                used.push(set);
            }
            (_, None) => unreachable!("human sessions are always resolved"),
        }
    }
    let graph = cooccurrence(&used, opts.frequency_weighted);
    stats.distinct_journals =
        used.iter().flat_map(|s| s.iter().map(|(j, _)| j)).collect::<BTreeSet<_>>().len() as u64;
    (graph, stats)
}

/// Pair counting over journal sets that are already sorted and distinct.
pub fn cooccurrence(sets: &[&[(JournalId, u64)]], frequency_weighted: bool) -> WeightedDigraph {
    let ids: Vec<&JournalId> = {
        let all: BTreeSet<&JournalId> = sets.iter().flat_map(|s| s.iter().map(|(j, _)| j)).collect();
        all.into_iter().collect()
    };
    let index: HashMap<&JournalId, u32> = ids.iter().enumerate().map(|(i, j)| (*j, i as u32)).collect();

    let counts: HashMap<u64, u64> = sets
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<u64, u64>, set| {
            for (a, (ja, na)) in set.iter().enumerate() {
                let ia = index[ja] as u64;
                for (jb, nb) in &set[a + 1..] {
                    let ib = index[jb] as u64;
                    let inc = if frequency_weighted { na * nb } else { 1 };
                    *acc.entry(ia << 32 | ib).or_insert(0) += inc;
                }
            }
            acc
        })
        .reduce(HashMap::new, |a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, a) };
            for (k, v) in small {
                *big.entry(k).or_insert(0) += v;
            }
            big
        });

    let mut g = WeightedDigraph::undirected();
    for (key, w) in counts {
        let (a, b) = ((key >> 32) as usize, (key & 0xffff_ffff) as usize);
        g.add_weight(ids[a].clone(), ids[b].clone(), w as f64).expect("distinct journals, positive weight");
    }
    g
}

/// Directed citation network: `citing -> cited` weighted by the summed
/// counts of records in `census_year` whose `pub_year` lies in `window`.
/// Journal refs in `records` must already be canonical journal ids.
pub fn build_citation_network(
    records: &[CitationRecord],
    census_year: i32,
    window: &BTreeSet<i32>,
) -> (WeightedDigraph, BuildStats) {
    let mut stats = BuildStats::default();
    let mut g = WeightedDigraph::directed();
    let mut journals = BTreeSet::new();
    for r in records {
        if r.census_year != census_year || !window.contains(&r.pub_year) {
            stats.skip(SkipReason::OutOfWindow, 1);
        } else if r.citing_journal == r.cited_journal {
            stats.skip(SkipReason::SelfCitation, 1);
        } else if r.count == 0 {
            stats.skip(SkipReason::ZeroCount, 1);
        } else {
            let (a, b) = (JournalId::new(&r.citing_journal), JournalId::new(&r.cited_journal));
            journals.insert(a.clone());
            journals.insert(b.clone());
            g.add_weight(a, b, r.count as f64).expect("distinct journals, positive count");
            stats.sessions_used += 1;
            stats.events_used += r.count;
        }
    }
    stats.distinct_journals = journals.len() as u64;
    (g, stats)
}

/// Census year with the two preceding publication years.
pub fn default_window(census_year: i32) -> BTreeSet<i32> {
    [census_year - 2, census_year - 1].into_iter().collect()
}
