use serde::{Deserialize, Serialize};

use crate::graph::{IndexedGraph, WeightedDigraph};

use super::{to_scores, MetricError, Scores};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams { damping: 0.85, tol: 1e-9, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    pub scores: Scores,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub residual: f64,
    pub converged: bool,
}

pub(crate) struct RawPageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

pub(crate) fn pagerank_raw(g: &IndexedGraph, weighted: bool, p: &PageRankParams) -> Result<RawPageRank, MetricError> {
    if !(p.damping > 0.0 && p.damping < 1.0) {
        return Err(MetricError::BadParameter(format!("damping {} outside (0, 1)", p.damping)));
    }
    let n = g.len();
    if n == 0 {
        return Ok(RawPageRank { scores: Vec::new(), iterations: 0, residual: 0.0, converged: true });
    }
    let nf = n as f64;
    let out_total: Vec<f64> = g
        .out
        .iter()
        .map(|l| if weighted { l.iter().map(|&(_, w)| w).sum() } else { l.len() as f64 })
        .collect();
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < p.max_iter {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&v| g.out[v].is_empty()).map(|v| x[v]).sum();
        let base = (1.0 - p.damping) / nf + p.damping * dangling / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(u, w) in &g.inc[v] {
                acc += x[u] * if weighted { w } else { 1.0 } / out_total[u];
            }
            *slot = base + p.damping * acc;
        }
        residual = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if residual < p.tol {
            break;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    Ok(RawPageRank { scores: x, iterations, residual, converged: residual < p.tol })
}

/// Damped random-walk stationary distribution. Transitions follow out-edges
/// in proportion to weight (or uniformly when unweighted); dangling nodes
/// jump uniformly. A run that hits `max_iter` still returns its scores with
/// `converged == false`.
pub fn pagerank(g: &WeightedDigraph, weighted: bool, params: &PageRankParams) -> Result<PageRank, MetricError> {
    let ig = g.indexed();
    let r = pagerank_raw(&ig, weighted, params)?;
    Ok(PageRank { scores: to_scores(&ig, r.scores), iterations: r.iterations, residual: r.residual, converged: r.converged })
}
