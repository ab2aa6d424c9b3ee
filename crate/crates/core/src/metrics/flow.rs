//! Current-flow (random-walk) betweenness, Newman's load.
//!
//! The graph is read as an electrical network with edge weights as
//! conductances. For a unit current from `s` to `t`, the throughput of a
//! node is half the absolute current on its incident edges; the score sums
//! this over all pairs `s < t` not involving the node. Following Brandes and
//! Fleischer, one inverse of the grounded Laplacian per component yields
//! every edge's potential differences for all pairs at once.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use rayon::prelude::*;

use crate::graph::{IndexedGraph, WeightedDigraph};

use super::{to_scores, MetricError, Scores};

/// `Σ_{s<t} |x_s − x_t|`, sorting `x` in place.
fn pairwise_abs_sum(x: &mut [f64]) -> f64 {
    x.sort_unstable_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter().enumerate().map(|(i, v)| v * (2.0 * i as f64 - n + 1.0)).sum()
}

/// Raw scores on the undirected interpretation of `g` (antiparallel
/// weights summed). Unweighted treats each adjacent pair as conductance 1.
pub(crate) fn current_flow_raw(g: &IndexedGraph, weighted: bool) -> Result<Vec<f64>, MetricError> {
    let adj = g.undirected_adjacency();
    let mut scores = vec![0.0; g.len()];
    for comp in g.weak_components() {
        let n = comp.len();
        if n < 3 {
            continue;
        }
        let mut local = vec![usize::MAX; g.len()];
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for &v in &comp {
            for &(u, w) in &adj[v] {
                if v < u {
                    edges.push((local[v], local[u], if weighted { w } else { 1.0 }));
                }
            }
        }

        // Ground node 0: the reduced Laplacian drops its row and column.
        let mut lap = Mat::<f64>::zeros(n - 1, n - 1);
        for &(a, b, c) in &edges {
            if a > 0 {
                lap[(a - 1, a - 1)] += c;
            }
            if b > 0 {
                lap[(b - 1, b - 1)] += c;
            }
            if a > 0 && b > 0 {
                lap[(a - 1, b - 1)] -= c;
                lap[(b - 1, a - 1)] -= c;
            }
        }
        let inv = lap
            .llt(Side::Lower)
            .map_err(|e| MetricError::Numerical(format!("grounded Laplacian not positive definite: {e:?}")))?
            .inverse();
        let potential = |v: usize, s: usize| if v == 0 || s == 0 { 0.0 } else { inv[(s - 1, v - 1)] };

        let flows: Vec<f64> = edges
            .par_iter()
            .map_init(
                || vec![0.0; n],
                |b, &(v, w, c)| {
                    for (s, slot) in b.iter_mut().enumerate() {
                        *slot = potential(v, s) - potential(w, s);
                    }
                    c * pairwise_abs_sum(b)
                },
            )
            .collect();

        let mut through = vec![0.0; n];
        for (&(a, b, _), f) in edges.iter().zip(flows) {
            through[a] += f;
            through[b] += f;
        }
        let endpoint_share = (n - 1) as f64 / 2.0;
        for (i, &v) in comp.iter().enumerate() {
            scores[v] = (through[i] / 2.0 - endpoint_share).max(0.0);
        }
    }
    Ok(scores)
}

/// Multiplier turning the raw pair sum into a mean over the unordered
/// pairs of the largest component that exclude the node.
pub(crate) fn current_flow_scale(lcc: usize) -> f64 {
    if lcc < 3 {
        0.0
    } else {
        2.0 / ((lcc - 1) * (lcc - 2)) as f64
    }
}

/// Current-flow betweenness per connected component of the undirected
/// interpretation of `g`.
pub fn newman_load(g: &WeightedDigraph, weighted: bool, lcc_normalized: bool) -> Result<Scores, MetricError> {
    let ig = g.indexed();
    let mut s = current_flow_raw(&ig, weighted)?;
    if lcc_normalized {
        let k = current_flow_scale(ig.largest_component_size());
        s.iter_mut().for_each(|x| *x *= k);
    }
    Ok(to_scores(&ig, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::JournalId;

    fn undirected(edges: &[(&str, &str, f64)]) -> WeightedDigraph {
        let mut g = WeightedDigraph::undirected();
        for &(a, b, w) in edges {
            g.add_weight(a.into(), b.into(), w).unwrap();
        }
        g
    }

    #[test]
    fn pairwise_sum_matches_quadratic() {
        let mut x = vec![0.3, -1.0, 2.5, 0.3, 7.0];
        let mut brute = 0.0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                brute += (x[i] - x[j] as f64).abs();
            }
        }
        assert!((pairwise_abs_sum(&mut x) - brute).abs() < 1e-12);
    }

    #[test]
    fn path_equals_shortest_path_betweenness() {
        let g = undirected(&[("A", "B", 1.0), ("B", "C", 1.0)]);
        let s = newman_load(&g, false, false).unwrap();
        assert!((s[&JournalId::new("B")] - 1.0).abs() < 1e-12);
        assert!(s[&JournalId::new("A")].abs() < 1e-12);
    }

    #[test]
    fn cycle_is_uniform() {
        let g = undirected(&[("A", "B", 1.0), ("B", "C", 1.0), ("C", "D", 1.0), ("D", "A", 1.0)]);
        let s = newman_load(&g, true, true).unwrap();
        let vals: Vec<f64> = s.values().copied().collect();
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-12);
        }
        assert!(vals[0] > 0.0);
    }

    #[test]
    fn components_are_independent() {
        let g = undirected(&[("A", "B", 1.0), ("B", "C", 1.0), ("X", "Y", 1.0)]);
        let s = newman_load(&g, false, false).unwrap();
        assert!((s[&JournalId::new("B")] - 1.0).abs() < 1e-12);
        assert_eq!(s[&JournalId::new("X")], 0.0);
    }
}
