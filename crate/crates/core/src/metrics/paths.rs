//! Degree, degree entropy, and the shortest-path family (closeness and
//! betweenness) computed from one shared sweep per source.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::graph::{IndexedGraph, WeightedDigraph};

use super::{to_scores, Scores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
}

/// Relative tolerance under which two weighted path lengths count as equal.
pub const PATH_TIE_TOLERANCE: f64 = 1e-10;

fn incident(g: &IndexedGraph, dir: Direction) -> &[Vec<(usize, f64)>] {
    match dir {
        Direction::In => &g.inc,
        Direction::Out => &g.out,
    }
}

pub(crate) fn degree_indexed(g: &IndexedGraph, dir: Direction, weighted: bool) -> Vec<f64> {
    incident(g, dir)
        .iter()
        .map(|l| if weighted { l.iter().map(|&(_, w)| w).sum() } else { l.len() as f64 })
        .collect()
}

pub(crate) fn entropy_indexed(g: &IndexedGraph, dir: Direction, weighted: bool) -> Vec<f64> {
    incident(g, dir)
        .iter()
        .map(|l| {
            let total: f64 = l.iter().map(|&(_, w)| if weighted { w } else { 1.0 }).sum();
            let mut h = 0.0;
            for &(_, w) in l {
                let p = if weighted { w } else { 1.0 } / total;
                h -= p * p.ln();
            }
            h.max(0.0)
        })
        .collect()
}

/// Neighbor count (unweighted) or strength (weighted) in one direction.
/// Undirected graphs give the same answer for both directions.
pub fn degree(g: &WeightedDigraph, dir: Direction, weighted: bool) -> Scores {
    let ig = g.indexed();
    to_scores(&ig, degree_indexed(&ig, dir, weighted))
}

/// Shannon entropy (natural log) of each node's incident-weight
/// distribution. Unweighted treats every link as weight 1.
pub fn degree_entropy(g: &WeightedDigraph, dir: Direction, weighted: bool) -> Scores {
    let ig = g.indexed();
    to_scores(&ig, entropy_indexed(&ig, dir, weighted))
}

/// Closeness and betweenness before any size normalization.
#[derive(Debug, Clone)]
pub(crate) struct PathSweep {
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn cost(w: f64, weighted: bool) -> f64 {
    if weighted {
        1.0 / w
    } else {
        1.0
    }
}

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= PATH_TIE_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

struct Workspace {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<usize>,
    settled: Vec<bool>,
    heap: BinaryHeap<HeapItem>,
    queue: std::collections::VecDeque<usize>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
            settled: vec![false; n],
            heap: BinaryHeap::new(),
            queue: Default::default(),
        }
    }

    /// Fills `dist` and `order` (settling order) from `s`.
    fn distances(&mut self, g: &IndexedGraph, s: usize, weighted: bool) {
        for &v in &self.order {
            self.dist[v] = f64::INFINITY;
        }
        self.order.clear();
        self.dist[s] = 0.0;
        if !weighted {
            self.queue.push_back(s);
            while let Some(v) = self.queue.pop_front() {
                self.order.push(v);
                for &(u, _) in &g.out[v] {
                    if self.dist[u].is_infinite() {
                        self.dist[u] = self.dist[v] + 1.0;
                        self.queue.push_back(u);
                    }
                }
            }
            return;
        }
        self.heap.push(HeapItem(0.0, s));
        while let Some(HeapItem(d, v)) = self.heap.pop() {
            if self.settled[v] {
                continue;
            }
            self.settled[v] = true;
            self.order.push(v);
            for &(u, w) in &g.out[v] {
                let alt = d + 1.0 / w;
                if alt < self.dist[u] {
                    self.dist[u] = alt;
                    self.heap.push(HeapItem(alt, u));
                }
            }
        }
        for &v in &self.order {
            self.settled[v] = false;
        }
    }
}

/// One shortest-path sweep per source. Predecessors are recovered from the
/// final distances, so path counting and dependency accumulation agree on
/// which near-equal weighted lengths are ties.
pub(crate) fn path_sweep(g: &IndexedGraph, weighted: bool) -> PathSweep {
    let n = g.len();
    let scc = g.strong_component_labels();
    let chunk = (n / 256).max(16);
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<(Vec<f64>, Vec<f64>)> = sources
        .par_chunks(chunk)
        .map(|chunk_sources| {
            let mut ws = Workspace::new(n);
            let mut bc = vec![0.0; n];
            let mut cl = Vec::with_capacity(chunk_sources.len());
            for &s in chunk_sources {
                ws.distances(g, s, weighted);
                let (mut reach, mut total) = (0usize, 0.0);
                for &v in &ws.order[1..] {
                    if scc[v] == scc[s] {
                        reach += 1;
                        total += ws.dist[v];
                    }
                }
                cl.push(if reach == 0 { 0.0 } else { reach as f64 / total });

                ws.sigma[s] = 1.0;
                for &v in &ws.order[1..] {
                    let mut sig = 0.0;
                    for &(u, w) in &g.inc[v] {
                        if ws.dist[u].is_finite() && same_length(ws.dist[u] + cost(w, weighted), ws.dist[v]) {
                            sig += ws.sigma[u];
                        }
                    }
                    ws.sigma[v] = sig;
                }
                for &v in ws.order.iter().rev() {
                    let coeff = (1.0 + ws.delta[v]) / ws.sigma[v];
                    for &(u, w) in &g.inc[v] {
                        if ws.dist[u].is_finite() && same_length(ws.dist[u] + cost(w, weighted), ws.dist[v]) {
                            ws.delta[u] += ws.sigma[u] * coeff;
                        }
                    }
                    if v != s {
                        bc[v] += ws.delta[v];
                    }
                }
                for &v in &ws.order {
                    ws.sigma[v] = 0.0;
                    ws.delta[v] = 0.0;
                }
            }
            (bc, cl)
        })
        .collect();

    let mut betweenness = vec![0.0; n];
    let mut closeness = Vec::with_capacity(n);
    for (bc, cl) in partials {
        for (acc, x) in betweenness.iter_mut().zip(bc) {
            *acc += x;
        }
        closeness.extend(cl);
    }
    if !g.directed {
        for b in &mut betweenness {
            *b /= 2.0;
        }
    }
    PathSweep { closeness, betweenness }
}

pub(crate) fn closeness_scale(lcc: usize) -> f64 {
    if lcc == 0 {
        0.0
    } else {
        1.0 / lcc as f64
    }
}

/// Multiplier mapping raw betweenness onto the fraction of node pairs of
/// the largest component.
pub(crate) fn betweenness_scale(lcc: usize, directed: bool) -> f64 {
    if lcc < 3 {
        return 0.0;
    }
    let pairs = ((lcc - 1) * (lcc - 2)) as f64;
    if directed {
        1.0 / pairs
    } else {
        2.0 / pairs
    }
}

/// `reachable / Σ distance` within the node's strongly connected component
/// (connected component when undirected). Edge length is 1, or `1/weight`
/// when weighted. Normalization divides by the largest component size.
pub fn closeness(g: &WeightedDigraph, weighted: bool, lcc_normalized: bool) -> Scores {
    let ig = g.indexed();
    let mut c = path_sweep(&ig, weighted).closeness;
    if lcc_normalized {
        let k = closeness_scale(ig.largest_component_size());
        c.iter_mut().for_each(|x| *x *= k);
    }
    to_scores(&ig, c)
}

/// Shortest-path betweenness (Brandes). Normalization divides by the
/// number of ordered (directed) or unordered (undirected) pairs among the
/// other nodes of the largest component.
pub fn betweenness(g: &WeightedDigraph, weighted: bool, lcc_normalized: bool) -> Scores {
    let ig = g.indexed();
    let mut b = path_sweep(&ig, weighted).betweenness;
    if lcc_normalized {
        let k = betweenness_scale(ig.largest_component_size(), ig.directed);
        b.iter_mut().for_each(|x| *x *= k);
    }
    to_scores(&ig, b)
}
