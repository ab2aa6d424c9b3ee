//! Grouping events into sessions, conflating repeated requests, and
//! separating robot sessions from human ones.

use std::cmp::Ordering;
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{AgentHash, UsageEvent};

/// Inactivity gap (seconds) that ends a key-less session.
pub const DEFAULT_TIMEOUT_SECS: i64 = 1800;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session store line {line}: {reason}")]
    Store { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Human,
    Robot,
    /// Reserved for probabilistic classifiers; the rule-based policy never
    /// emits it.
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionFeatures {
    pub length: usize,
    pub duration: f64,
    pub median_gap: f64,
    pub distinct_artifacts: usize,
}

impl SessionFeatures {
    pub fn of(events: &[UsageEvent]) -> SessionFeatures {
        let length = events.len();
        let (first, last) = match (events.first(), events.last()) {
            (Some(f), Some(l)) => (f.timestamp.seconds(), l.timestamp.seconds()),
            _ => (0, 0),
        };
        let mut gaps: Vec<i64> =
            events.windows(2).map(|w| w[1].timestamp.seconds() - w[0].timestamp.seconds()).collect();
        gaps.sort_unstable();
        let median_gap = match gaps.len() {
            0 => 0.0,
            n if n % 2 == 1 => gaps[n / 2] as f64,
            n => (gaps[n / 2 - 1] + gaps[n / 2]) as f64 / 2.0,
        };
        let mut ids: Vec<&str> = events.iter().map(|e| &*e.artifact_ref.source_id).collect();
        ids.sort_unstable();
        ids.dedup();
        SessionFeatures { length, duration: (last - first) as f64, median_gap, distinct_artifacts: ids.len() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    /// Ordered by timestamp, ties by `event_seq`.
    pub events: Vec<UsageEvent>,
    pub agent_hash: Option<AgentHash>,
    pub classification: Classification,
    /// Features of the session as grouped, before any conflation.
    pub features: SessionFeatures,
}

/// Thresholds of the rule-based robot filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BotPolicy {
    /// Sessions longer than this are robots outright.
    pub max_length: usize,
    /// Median inter-request gap (seconds) below which a long enough session
    /// is a robot.
    pub min_median_gap: f64,
    pub min_length_for_gap_test: usize,
}

impl Default for BotPolicy {
    fn default() -> Self {
        BotPolicy { max_length: 100, min_median_gap: 1.0, min_length_for_gap_test: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum GroupKey<'a> {
    Explicit(&'a str),
    Agent(&'a str),
    None,
}

fn group_key(e: &UsageEvent) -> GroupKey<'_> {
    match (&e.session_key, &e.agent_hash) {
        (Some(k), _) => GroupKey::Explicit(k),
        (None, Some(a)) => GroupKey::Agent(a.as_str()),
        (None, None) => GroupKey::None,
    }
}

fn event_order(a: &UsageEvent, b: &UsageEvent) -> Ordering {
    group_key(a)
        .cmp(&group_key(b))
        .then(a.timestamp.cmp(&b.timestamp))
        .then(a.event_seq.cmp(&b.event_seq))
}

#[derive(Debug, Clone, Default)]
pub struct Grouping {
    pub sessions: Vec<Session>,
    /// Events carrying neither a session key nor an agent hash.
    pub rejected: Vec<UsageEvent>,
}

/// Groups events into sessions.
///
/// Events sharing a session key form one session. Events without a key
/// are grouped per agent hash, starting a new session whenever the gap to
/// the previous event exceeds `timeout_secs`. Sessions come out ordered by
/// grouping key, then start time; all are labelled human until classified.
pub fn group_sessions(mut events: Vec<UsageEvent>, timeout_secs: i64) -> Grouping {
    events.par_sort_unstable_by(event_order);
    let mut out = Grouping::default();
    let mut current: Vec<UsageEvent> = Vec::new();
    let mut agent_ordinal = 0usize;

    let close = |current: &mut Vec<UsageEvent>, ordinal: usize, out: &mut Grouping| {
        if current.is_empty() {
            return;
        }
        let events = std::mem::take(current);
        let first = &events[0];
        let (session_id, agent_hash) = match group_key(first) {
            GroupKey::Explicit(k) => {
                let agent = events[0].agent_hash.clone();
                let uniform = events.iter().all(|e| e.agent_hash == agent);
                (format!("k:{k}"), if uniform { agent } else { None })
            }
            GroupKey::Agent(a) => (format!("a:{a}:{ordinal}"), first.agent_hash.clone()),
            GroupKey::None => unreachable!("unkeyed events are rejected before closing"),
        };
        let features = SessionFeatures::of(&events);
        out.sessions.push(Session {
            session_id,
            events,
            agent_hash,
            classification: Classification::Human,
            features,
        });
    };

    for e in events {
        let key = group_key(&e);
        if key == GroupKey::None {
            out.rejected.push(e);
            continue;
        }
        if let Some(prev) = current.last() {
            let prev_key = group_key(prev);
            if prev_key != key {
                close(&mut current, agent_ordinal, &mut out);
                agent_ordinal = 0;
            } else if matches!(key, GroupKey::Agent(_))
                && e.timestamp.seconds() - prev.timestamp.seconds() > timeout_secs
            {
                close(&mut current, agent_ordinal, &mut out);
                agent_ordinal += 1;
            }
        }
        current.push(e);
    }
    close(&mut current, agent_ordinal, &mut out);
    out
}

/// Collapses every maximal run of consecutive requests for the same
/// artifact to the run's first event.
pub fn conflate_consecutive(mut session: Session) -> Session {
    session.events.dedup_by(|later, earlier| later.artifact_ref.source_id == earlier.artifact_ref.source_id);
    session
}

pub fn classify_session(s: &Session, policy: &BotPolicy) -> Classification {
    classify_features(&s.features, policy)
}

pub fn classify_features(f: &SessionFeatures, policy: &BotPolicy) -> Classification {
    let too_long = f.length > policy.max_length;
    let too_fast = f.length >= policy.min_length_for_gap_test && f.median_gap < policy.min_median_gap;
    if too_long || too_fast {
        Classification::Robot
    } else {
        Classification::Human
    }
}

/// Classifies then conflates every session.
pub fn classify_and_conflate(sessions: Vec<Session>, policy: &BotPolicy) -> Vec<Session> {
    sessions
        .into_par_iter()
        .map(|mut s| {
            s.classification = classify_session(&s, policy);
            conflate_consecutive(s)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct StoredSession {
    session_id: String,
    agent_hash: Option<AgentHash>,
    classification: Classification,
    features: SessionFeatures,
    events: Vec<u64>,
}

/// Writes one JSON object per session; events are listed by `event_seq`.
pub fn write_sessions<W: Write>(out: W, sessions: &[Session]) -> io::Result<()> {
    let mut out = io::BufWriter::with_capacity(1 << 20, out);
    for s in sessions {
        let stored = StoredSession {
            session_id: s.session_id.clone(),
            agent_hash: s.agent_hash.clone(),
            classification: s.classification,
            features: s.features,
            events: s.events.iter().map(|e| e.event_seq).collect(),
        };
        serde_json::to_writer(&mut out, &stored)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Rebuilds sessions from a session store and the event file it refers to.
/// `events` must be indexed by `event_seq`.
pub fn read_sessions<R: BufRead>(input: R, events: Vec<UsageEvent>) -> Result<Vec<Session>, SessionError> {
    let mut slots: Vec<Option<UsageEvent>> = events.into_iter().map(Some).collect();
    let mut sessions = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i as u64 + 1;
        if line.is_empty() {
            continue;
        }
        let stored: StoredSession = serde_json::from_str(&line)
            .map_err(|e| SessionError::Store { line: lineno, reason: e.to_string() })?;
        let mut evs = Vec::with_capacity(stored.events.len());
        for seq in stored.events {
            let slot = slots.get_mut(seq as usize).and_then(Option::take).filter(|e| e.event_seq == seq);
            match slot {
                Some(e) => evs.push(e),
                None => {
                    return Err(SessionError::Store { line: lineno, reason: format!("unknown or repeated event {seq}") })
                }
            }
        }
        sessions.push(Session {
            session_id: stored.session_id,
            events: evs,
            agent_hash: stored.agent_hash,
            classification: stored.classification,
            features: stored.features,
        });
    }
    Ok(sessions)
}
