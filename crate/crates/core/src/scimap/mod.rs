//! Science maps: pruning a journal network down to its strongest
//! connections, keeping the largest connected component, laying it out with
//! a force-directed model and rendering it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, JournalId, WeightedDigraph};

mod layout;
mod render;

pub use layout::{fr_layout, Layout, LayoutParams};
pub use render::{export_map, MapStyle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PruneSpec {
    pub top_k_edges: usize,
    pub per_node_cap: usize,
}

impl Default for PruneSpec {
    fn default() -> Self {
        PruneSpec { top_k_edges: 5000, per_node_cap: 12 }
    }
}

/// Heaviest first; equal weights fall back to canonical `(source, target)`.
fn strength_order(a: &(&JournalId, &JournalId, f64), b: &(&JournalId, &JournalId, f64)) -> std::cmp::Ordering {
    b.2.total_cmp(&a.2).then_with(|| (a.0, a.1).cmp(&(b.0, b.1)))
}

/// Keeps the `top_k_edges` heaviest edges, then lets every node retain its
/// `per_node_cap` heaviest remaining incident edges. An edge survives when
/// at least one endpoint retains it. Nodes left without edges are dropped.
pub fn prune(g: &WeightedDigraph, spec: &PruneSpec) -> WeightedDigraph {
    let mut edges: Vec<(&JournalId, &JournalId, f64)> = g.edges().collect();
    edges.sort_by(strength_order);
    edges.truncate(spec.top_k_edges);

    let mut incident: BTreeMap<&JournalId, Vec<usize>> = BTreeMap::new();
    for (i, (a, b, _)) in edges.iter().enumerate() {
        incident.entry(*a).or_default().push(i);
        incident.entry(*b).or_default().push(i);
    }
    let mut keep = vec![false; edges.len()];
    for list in incident.values() {
        // `edges` is already in strength order, so each list is too.
        for &i in list.iter().take(spec.per_node_cap) {
            keep[i] = true;
        }
    }
    WeightedDigraph::from_edge_subset(g.is_directed(), edges.into_iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| e))
}

/// Induced subgraph on the largest weakly connected component; among equal
/// sizes the component holding the smallest journal id wins.
pub fn largest_connected_component(g: &WeightedDigraph) -> Result<WeightedDigraph, GraphError> {
    if g.node_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let ig = g.indexed();
    let comps = ig.weak_components();
    let mut best = &comps[0];
    for c in &comps[1..] {
        if c.len() > best.len() {
            best = c;
        }
    }
    let keep: BTreeSet<JournalId> = best.iter().map(|&i| ig.ids[i].clone()).collect();
    Ok(g.induced_subgraph(&keep))
}

/// Graph-level parameters of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub node_count: usize,
    pub edge_count: usize,
    pub max_weight: Option<f64>,
    pub min_positive_weight: Option<f64>,
    pub density: f64,
    /// Freeman degree centralization; absent below 3 nodes.
    pub centralization: Option<f64>,
    pub hierarchy: f64,
}

/// Density over possible (ordered, when directed) pairs; Freeman degree
/// centralization of the undirected skeleton, `Σ(c_max − c_i) / ((n−1)(n−2))`;
/// hierarchy as the share of reachable ordered pairs `(i, j)` whose reverse
/// is unreachable.
pub fn graph_params(g: &WeightedDigraph) -> Result<GraphParams, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let m = g.edge_count();
    let max_weight = g.edges().map(|(_, _, w)| w).reduce(f64::max);
    let min_positive_weight = g.edges().map(|(_, _, w)| w).filter(|&w| w > 0.0).reduce(f64::min);
    let pairs = if g.is_directed() { n * n.saturating_sub(1) } else { n * n.saturating_sub(1) / 2 };
    let density = if pairs == 0 { 0.0 } else { m as f64 / pairs as f64 };

    let ig = g.indexed();
    let skeleton = ig.undirected_adjacency();
    let centralization = (n >= 3).then(|| {
        let deg: Vec<f64> = skeleton.iter().map(|l| l.len() as f64).collect();
        let cmax = deg.iter().copied().fold(0.0, f64::max);
        deg.iter().map(|d| cmax - d).sum::<f64>() / ((n - 1) * (n - 2)) as f64
    });

    let hierarchy = if !g.is_directed() {
        0.0
    } else {
        let scc = ig.strong_component_labels();
        let mut sizes: BTreeMap<usize, u64> = BTreeMap::new();
        for &l in &scc {
            *sizes.entry(l).or_insert(0) += 1;
        }
        let mutual: u64 = sizes.values().map(|s| s * (s - 1)).sum();
        let mut reachable = 0u64;
        let mut seen = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for s in 0..n {
            seen[s] = s;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &(u, _) in &ig.out[v] {
                    if seen[u] != s {
                        seen[u] = s;
                        reachable += 1;
                        queue.push_back(u);
                    }
                }
            }
        }
        if reachable == 0 {
            0.0
        } else {
            (reachable - mutual) as f64 / reachable as f64
        }
    };
    Ok(GraphParams { node_count: n, edge_count: m, max_weight, min_positive_weight, density, centralization, hierarchy })
}
