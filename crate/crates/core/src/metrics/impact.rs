use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::JournalId;
use crate::ingest::{ArticleCountRecord, CitationRecord};

use super::Scores;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum IfExclusionReason {
    MissingArticleCount { year: i32 },
    ZeroArticles,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IfExclusion {
    pub journal: JournalId,
    #[serde(flatten)]
    pub reason: IfExclusionReason,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ImpactFactors {
    pub scores: Scores,
    pub excluded: Vec<IfExclusion>,
}

/// Citations received in `census_year` by items published in `window`,
/// divided by the articles published in `window`. Self-citations count.
/// Journal refs must already be canonical ids. A journal lacking an
/// article count for some window year, or with no articles, is excluded.
pub fn impact_factor(
    citations: &[CitationRecord],
    counts: &[ArticleCountRecord],
    census_year: i32,
    window: &BTreeSet<i32>,
) -> ImpactFactors {
    let mut cited: BTreeMap<&str, u64> = BTreeMap::new();
    for r in citations {
        if r.census_year == census_year && window.contains(&r.pub_year) {
            *cited.entry(r.cited_journal.as_str()).or_insert(0) += r.count;
        }
    }
    let mut articles: BTreeMap<&str, BTreeMap<i32, u64>> = BTreeMap::new();
    for r in counts {
        if window.contains(&r.year) {
            *articles.entry(r.journal.as_str()).or_default().entry(r.year).or_insert(0) += r.articles;
        }
    }
    let journals: BTreeSet<&str> = cited.keys().chain(articles.keys()).copied().collect();

    let mut out = ImpactFactors::default();
    for j in journals {
        let id = JournalId::new(j);
        let per_year = articles.get(j);
        if let Some(&year) = window.iter().find(|y| per_year.map_or(true, |m| !m.contains_key(y))) {
            out.excluded.push(IfExclusion { journal: id, reason: IfExclusionReason::MissingArticleCount { year } });
            continue;
        }
        let denom: u64 = per_year.map_or(0, |m| m.values().sum());
        if denom == 0 {
            out.excluded.push(IfExclusion { journal: id, reason: IfExclusionReason::ZeroArticles });
            continue;
        }
        let num = cited.get(j).copied().unwrap_or(0);
        out.scores.insert(id, num as f64 / denom as f64);
    }
    out
}
