//! Independent reference implementations and fixtures shared by the
//! integration tests. Nothing here calls into the metric kernels under
//! test; each oracle works from a plain edge list.

#![allow(dead_code)]

pub mod kernels;

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use usagenet::graph::{JournalId, WeightedDigraph};

/// Plain description of a small graph: `n` nodes named `n0..`, edges with
/// positive weights. Undirected edges are listed once.
#[derive(Debug, Clone)]
pub struct SmallGraph {
    pub n: usize,
    pub directed: bool,
    pub edges: Vec<(usize, usize, f64)>,
}

pub fn name(i: usize) -> JournalId {
    JournalId::new(format!("n{i}"))
}

impl SmallGraph {
    pub fn to_graph(&self) -> WeightedDigraph {
        let mut g = WeightedDigraph::new(self.directed);
        for i in 0..self.n {
            g.add_node(name(i));
        }
        for &(a, b, w) in &self.edges {
            g.set_edge(name(a), name(b), w).unwrap();
        }
        g
    }

    /// Arcs in both directions for undirected graphs.
    pub fn arcs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = self.edges.clone();
        if !self.directed {
            out.extend(self.edges.iter().map(|&(a, b, w)| (b, a, w)));
        }
        out
    }

    pub fn scaled(&self, c: f64) -> SmallGraph {
        SmallGraph { edges: self.edges.iter().map(|&(a, b, w)| (a, b, w * c)).collect(), ..self.clone() }
    }
}

/// Random graph on `n` nodes: each pair (ordered, if directed) becomes an
/// edge with probability `p`. Weight styles: all 1, small integers (ties
/// likely), or continuous.
pub fn random_graph(rng: &mut impl Rng, n: usize, directed: bool, p: f64, style: u8) -> SmallGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b || (!directed && b < a) {
                continue;
            }
            if rng.random_bool(p) {
                let w = match style {
                    0 => 1.0,
                    1 => f64::from(rng.random_range(1..=4u32)),
                    _ => rng.random_range(0.1..5.0),
                };
                edges.push((a, b, w));
            }
        }
    }
    SmallGraph { n, directed, edges }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scores(values: &[f64]) -> BTreeMap<JournalId, f64> {
    values.iter().enumerate().map(|(i, &v)| (name(i), v)).collect()
}

// ---- degree family ----

pub fn degree(g: &SmallGraph, incoming: bool, weighted: bool) -> Vec<f64> {
    let mut d = vec![0.0; g.n];
    for (a, b, w) in g.arcs() {
        let v = if incoming { b } else { a };
        d[v] += if weighted { w } else { 1.0 };
    }
    d
}

pub fn entropy(g: &SmallGraph, incoming: bool, weighted: bool) -> Vec<f64> {
    let mut lists = vec![Vec::new(); g.n];
    for (a, b, w) in g.arcs() {
        lists[if incoming { b } else { a }].push(if weighted { w } else { 1.0 });
    }
    lists
        .iter()
        .map(|l| {
            let total: f64 = l.iter().sum();
            l.iter().map(|w| w / total).map(|p| -p * p.ln()).sum::<f64>()
        })
        .collect()
}

// ---- components ----

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Components as sorted member lists.
    pub fn groups(&mut self) -> Vec<Vec<usize>> {
        let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.parent.len() {
            let r = self.find(v);
            by_root.entry(r).or_default().push(v);
        }
        by_root.into_values().collect()
    }
}

pub fn weak_components(g: &SmallGraph) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(g.n);
    for &(a, b, _) in &g.edges {
        uf.union(a, b);
    }
    uf.groups()
}

pub fn largest_weak(g: &SmallGraph) -> usize {
    weak_components(g).iter().map(Vec::len).max().unwrap_or(0)
}

// ---- shortest paths ----

fn arc_cost(w: f64, weighted: bool) -> f64 {
    if weighted {
        1.0 / w
    } else {
        1.0
    }
}

/// All-pairs distances by Floyd-Warshall.
pub fn floyd(g: &SmallGraph, weighted: bool) -> Vec<Vec<f64>> {
    let n = g.n;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (a, b, w) in g.arcs() {
        d[a][b] = d[a][b].min(arc_cost(w, weighted));
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn closeness(g: &SmallGraph, weighted: bool, normalized: bool) -> Vec<f64> {
    let d = floyd(g, weighted);
    let lcc = largest_weak(g) as f64;
    (0..g.n)
        .map(|s| {
            // Same strongly connected component: mutually reachable.
            let peers: Vec<usize> = (0..g.n).filter(|&t| t != s && d[s][t].is_finite() && d[t][s].is_finite()).collect();
            let total: f64 = peers.iter().map(|&t| d[s][t]).sum();
            let c = if peers.is_empty() { 0.0 } else { peers.len() as f64 / total };
            if normalized {
                c / lcc
            } else {
                c
            }
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Every simple path from `s` to `t` with its length.
fn simple_paths(adj: &[Vec<(usize, f64)>], s: usize, t: usize) -> Vec<(Vec<usize>, f64)> {
    fn walk(
        adj: &[Vec<(usize, f64)>],
        v: usize,
        t: usize,
        path: &mut Vec<usize>,
        len: f64,
        on: &mut Vec<bool>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if v == t {
            out.push((path.clone(), len));
            return;
        }
        for &(u, c) in &adj[v] {
            if !on[u] {
                on[u] = true;
                path.push(u);
                walk(adj, u, t, path, len + c, on, out);
                path.pop();
                on[u] = false;
            }
        }
    }
    let mut on = vec![false; adj.len()];
    on[s] = true;
    let mut out = Vec::new();
    walk(adj, s, t, &mut vec![s], 0.0, &mut on, &mut out);
    out
}

/// Betweenness by enumerating all simple paths between every ordered pair.
pub fn betweenness(g: &SmallGraph, weighted: bool, normalized: bool) -> Vec<f64> {
    let mut adj = vec![Vec::new(); g.n];
    for (a, b, w) in g.arcs() {
        adj[a].push((b, arc_cost(w, weighted)));
    }
    let mut bc = vec![0.0; g.n];
    for s in 0..g.n {
        for t in 0..g.n {
            if s == t {
                continue;
            }
            let paths = simple_paths(&adj, s, t);
            let Some(best) = paths.iter().map(|p| p.1).reduce(f64::min) else { continue };
            let shortest: Vec<&Vec<usize>> = paths.iter().filter(|p| close(p.1, best)).map(|p| &p.0).collect();
            let total = shortest.len() as f64;
            for v in 0..g.n {
                if v != s && v != t {
                    let through = shortest.iter().filter(|p| p.contains(&v)).count() as f64;
                    bc[v] += through / total;
                }
            }
        }
    }
    if !g.directed {
        bc.iter_mut().for_each(|x| *x /= 2.0);
    }
    if normalized {
        let l = largest_weak(g);
        let k = if l < 3 {
            0.0
        } else {
            let pairs = ((l - 1) * (l - 2)) as f64;
            if g.directed {
                1.0 / pairs
            } else {
                2.0 / pairs
            }
        };
        bc.iter_mut().for_each(|x| *x *= k);
    }
    bc
}

// ---- current flow ----

/// Random-walk betweenness from the Laplacian pseudo-inverse of each
/// component, `(L + J/k)⁻¹ − J/k`: for every pair `s < t` the node throughput
/// `½ Σ_j c_vj |V_v − V_j|`, summed over pairs not involving the node.
pub fn current_flow(g: &SmallGraph, weighted: bool, normalized: bool) -> Vec<f64> {
    let mut cond = vec![vec![0.0; g.n]; g.n];
    for &(a, b, w) in &g.edges {
        let c = if weighted { w } else { 1.0 };
        if weighted {
            cond[a][b] += c;
            cond[b][a] += c;
        } else {
            cond[a][b] = 1.0;
            cond[b][a] = 1.0;
        }
    }
    let mut out = vec![0.0; g.n];
    for comp in weak_components(g) {
        let k = comp.len();
        if k < 3 {
            continue;
        }
        let mut lap = DMatrix::<f64>::zeros(k, k);
        for (i, &a) in comp.iter().enumerate() {
            for (j, &b) in comp.iter().enumerate() {
                if i != j && cond[a][b] > 0.0 {
                    lap[(i, j)] -= cond[a][b];
                    lap[(i, i)] += cond[a][b];
                }
            }
        }
        // L⁺ = (L + J/k)⁻¹ − J/k for a connected Laplacian.
        let j = DMatrix::<f64>::from_element(k, k, 1.0 / k as f64);
        let pinv = (lap + &j).try_inverse().expect("invertible") - j;
        for s in 0..k {
            for t in s + 1..k {
                let mut rhs = DVector::<f64>::zeros(k);
                rhs[s] = 1.0;
                rhs[t] = -1.0;
                let v = &pinv * rhs;
                for i in 0..k {
                    if i == s || i == t {
                        continue;
                    }
                    let mut flow = 0.0;
                    for j in 0..k {
                        flow += cond[comp[i]][comp[j]] * (v[i] - v[j]).abs();
                    }
                    out[comp[i]] += flow / 2.0;
                }
            }
        }
    }
    if normalized {
        let l = largest_weak(g);
        let k = if l < 3 { 0.0 } else { 2.0 / ((l - 1) * (l - 2)) as f64 };
        out.iter_mut().for_each(|x| *x *= k);
    }
    out
}

// ---- PageRank ----

/// Solves `(I − d M) x = (1 − d)/n · 1` where `M` is the column-stochastic
/// transition matrix with dangling columns spread uniformly.
pub fn pagerank(g: &SmallGraph, weighted: bool, damping: f64) -> Vec<f64> {
    let n = g.n;
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut out_total = vec![0.0; n];
    let arcs = g.arcs();
    for &(a, _, w) in &arcs {
        out_total[a] += if weighted { w } else { 1.0 };
    }
    for &(a, b, w) in &arcs {
        m[(b, a)] += if weighted { w } else { 1.0 } / out_total[a];
    }
    for a in 0..n {
        if out_total[a] == 0.0 {
            for b in 0..n {
                m[(b, a)] = 1.0 / n as f64;
            }
        }
    }
    let system = DMatrix::<f64>::identity(n, n) - m * damping;
    let rhs = DVector::<f64>::from_element(n, (1.0 - damping) / n as f64);
    let x = system.lu().solve(&rhs).expect("non-singular");
    let total: f64 = x.iter().sum();
    x.iter().map(|v| v / total).collect()
}

// ---- ranks and correlation ----

/// Average ranks, highest value first.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut r = vec![0.0; n];
    for i in 0..n {
        let above = x.iter().filter(|&&v| v > x[i]).count();
        let equal = x.iter().filter(|&&v| v == x[i]).count();
        r[i] = above as f64 + (equal as f64 + 1.0) / 2.0;
    }
    r
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// `1 − 6 Σ d² / (n (n² − 1))`, valid without ties.
pub fn spearman_closed_form(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

// ---- co-occurrence ----

/// Weighted pair counts from per-session journal sequences (already
/// conflated); `None` entries are unresolved requests.
pub fn pair_counts(sessions: &[Vec<Option<String>>], frequency: bool) -> BTreeMap<(String, String), u64> {
    let mut out = BTreeMap::new();
    for s in sessions {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for j in s.iter().flatten() {
            *counts.entry(j.as_str()).or_insert(0) += 1;
        }
        let items: Vec<(&str, u64)> = counts.into_iter().collect();
        for i in 0..items.len() {
            for k in i + 1..items.len() {
                let inc = if frequency { items[i].1 * items[k].1 } else { 1 };
                *out.entry((items[i].0.to_owned(), items[k].0.to_owned())).or_insert(0) += inc;
            }
        }
    }
    out
}

pub fn edge_map(g: &WeightedDigraph) -> BTreeMap<(String, String), f64> {
    g.edges().map(|(a, b, w)| ((a.to_string(), b.to_string()), w)).collect()
}

pub fn node_names(ids: &BTreeSet<JournalId>) -> Vec<String> {
    ids.iter().map(|j| j.to_string()).collect()
}

// ---- pipeline fixtures ----

/// Generates a corpus under `dir/corpus` and returns a run configuration
/// writing to `dir/out`.
pub fn corpus_config(dir: &std::path::Path, spec: &usagenet::synth::SynthSpec) -> usagenet::pipeline::PipelineConfig {
    use usagenet::synth::{generate_corpus, CorpusPaths};
    generate_corpus(spec, &dir.join("corpus")).unwrap();
    let paths = CorpusPaths::in_dir(&dir.join("corpus"));
    std::fs::write(dir.join("salt"), format!("salt-{}\n", spec.seed)).unwrap();
    usagenet::pipeline::PipelineConfig {
        usage_log: paths.usage,
        citations: Some(paths.citations),
        article_counts: Some(paths.article_counts),
        journal_registry: paths.registry,
        equivalences: Some(paths.equivalences),
        output_dir: dir.join("out"),
        salt_file: Some(dir.join("salt")),
        salt_env: None,
        ..Default::default()
    }
}

/// Every regular file under `root`, as paths relative to it, sorted.
pub fn files_under(root: &std::path::Path) -> Vec<std::path::PathBuf> {
    fn walk(root: &std::path::Path, dir: &std::path::Path, out: &mut Vec<std::path::PathBuf>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
