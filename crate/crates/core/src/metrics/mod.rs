//! Network impact metrics and their rankings.
//!
//! Each family works on a [`WeightedDigraph`](crate::graph::WeightedDigraph)
//! and returns one score per journal. [`catalog`] evaluates a registry of
//! [`MetricSpec`]s over the usage and citation networks and ranks the
//! results.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{IndexedGraph, JournalId};

pub mod catalog;
mod flow;
mod impact;
mod pagerank;
mod paths;

pub use catalog::{
    default_registry, read_metrics_table, read_registry, run_catalog, write_metrics_table, write_registry, Catalog,
    CatalogInputs, CatalogParams, ImpactInputs, MetricFailure, MetricFamily, MetricRanking, MetricSpec, Network,
};
pub use flow::newman_load;
pub use impact::{impact_factor, IfExclusion, IfExclusionReason, ImpactFactors};
pub use pagerank::{pagerank, PageRank, PageRankParams};
pub use paths::{betweenness, closeness, degree, degree_entropy, Direction, PATH_TIE_TOLERANCE};

/// One score per journal.
pub type Scores = BTreeMap<JournalId, f64>;

/// Relative tolerance under which two scores share a rank.
pub const RANK_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("invalid metric spec: {0}")]
    InvalidSpec(String),
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn to_scores(g: &IndexedGraph, values: Vec<f64>) -> Scores {
    g.ids.iter().cloned().zip(values).collect()
}

fn tied(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= RANK_TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Average ranks in descending score order: rank 1 is the highest score and
/// tied scores share the mean of the positions they span.
pub fn rank(scores: &Scores) -> BTreeMap<JournalId, f64> {
    let mut order: Vec<(&JournalId, f64)> = scores.iter().map(|(j, &s)| (j, s)).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut ranks = BTreeMap::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && tied(order[start].1, order[end].1) {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for (j, _) in &order[start..end] {
            ranks.insert((*j).clone(), avg);
        }
        start = end;
    }
    ranks
}
