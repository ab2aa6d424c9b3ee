//! Journal-level weighted networks and their on-disk forms.
//!
//! A [`WeightedDigraph`] serves both the usage network (undirected,
//! co-occurrence counts) and the citation network (directed, citation
//! counts). Undirected graphs store each unordered pair once, keyed with
//! the smaller journal id first.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable identifier of a canonical journal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JournalId(Arc<str>);

impl JournalId {
    pub fn new(id: impl AsRef<str>) -> Self {
        JournalId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for JournalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for JournalId {
    fn from(s: &str) -> Self {
        JournalId(Arc::from(s))
    }
}

impl From<String> for JournalId {
    fn from(s: String) -> Self {
        JournalId(Arc::from(s))
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on journal {0}")]
    SelfLoop(JournalId),
    #[error("edge {0} -> {1} has non-positive or non-finite weight {2}")]
    BadWeight(JournalId, JournalId, f64),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Weighted journal network. All weights are finite and positive and there
/// are no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    nodes: BTreeSet<JournalId>,
    edges: BTreeMap<(JournalId, JournalId), f64>,
    directed: bool,
}

impl WeightedDigraph {
    pub fn new(directed: bool) -> Self {
        WeightedDigraph { nodes: BTreeSet::new(), edges: BTreeMap::new(), directed }
    }

    pub fn directed() -> Self {
        Self::new(true)
    }

    pub fn undirected() -> Self {
        Self::new(false)
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn add_node(&mut self, id: JournalId) {
        self.nodes.insert(id);
    }

    fn key(&self, a: JournalId, b: JournalId) -> (JournalId, JournalId) {
        if !self.directed && b < a {
            (b, a)
        } else {
            (a, b)
        }
    }

    fn check(a: &JournalId, b: &JournalId, w: f64) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.clone()));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(GraphError::BadWeight(a.clone(), b.clone(), w));
        }
        Ok(())
    }

    /// Sets the weight of an edge, replacing any previous weight.
    pub fn set_edge(&mut self, a: JournalId, b: JournalId, w: f64) -> Result<(), GraphError> {
        Self::check(&a, &b, w)?;
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        let key = self.key(a, b);
        self.edges.insert(key, w);
        Ok(())
    }

    /// Adds `w` to the weight of an edge, creating it if absent.
    pub fn add_weight(&mut self, a: JournalId, b: JournalId, w: f64) -> Result<(), GraphError> {
        Self::check(&a, &b, w)?;
        self.nodes.insert(a.clone());
        self.nodes.insert(b.clone());
        let key = self.key(a, b);
        *self.edges.entry(key).or_insert(0.0) += w;
        Ok(())
    }

    /// Weight of the edge `a -> b`; for undirected graphs either order works.
    pub fn weight(&self, a: &JournalId, b: &JournalId) -> Option<f64> {
        if !self.directed && b < a {
            self.edges.get(&(b.clone(), a.clone())).copied()
        } else {
            self.edges.get(&(a.clone(), b.clone())).copied()
        }
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &JournalId> + '_ {
        self.nodes.iter()
    }

    pub fn node_set(&self) -> &BTreeSet<JournalId> {
        &self.nodes
    }

    pub fn contains_node(&self, id: &JournalId) -> bool {
        self.nodes.contains(id)
    }

    /// Edges in canonical order: lexicographic on `(source, target)`.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (&JournalId, &JournalId, f64)> + '_ {
        self.edges.iter().map(|((a, b), w)| (a, b, *w))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    /// Subgraph induced by `keep`; nodes not in `self` are ignored.
    pub fn induced_subgraph(&self, keep: &BTreeSet<JournalId>) -> WeightedDigraph {
        let nodes: BTreeSet<JournalId> = self.nodes.intersection(keep).cloned().collect();
        let edges = self
            .edges
            .iter()
            .filter(|((a, b), _)| nodes.contains(a) && nodes.contains(b))
            .map(|(k, w)| (k.clone(), *w))
            .collect();
        WeightedDigraph { nodes, edges, directed: self.directed }
    }

    /// Builds a graph from an edge subset of `self`, keeping only endpoints
    /// of the retained edges.
    pub(crate) fn from_edge_subset<'a>(
        directed: bool,
        edges: impl IntoIterator<Item = (&'a JournalId, &'a JournalId, f64)>,
    ) -> WeightedDigraph {
        let mut g = WeightedDigraph::new(directed);
        for (a, b, w) in edges {
            g.nodes.insert(a.clone());
            g.nodes.insert(b.clone());
            g.edges.insert((a.clone(), b.clone()), w);
        }
        g
    }

    /// Dense index form used by the metric kernels.
    pub fn indexed(&self) -> IndexedGraph {
        IndexedGraph::from_graph(self)
    }

    /// Writes the `source,target,weight` edge list, sorted lexicographically.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<(), GraphError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["source", "target", "weight"]).map_err(csv_io)?;
        for (a, b, weight) in self.edges() {
            w.write_record([a.as_str(), b.as_str(), &weight.to_string()]).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an edge list written by [`write_edge_list`](Self::write_edge_list).
    /// Repeated pairs are summed.
    pub fn read_edge_list<R: io::Read>(input: R, directed: bool) -> Result<Self, GraphError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
        let headers = rdr.headers().map_err(csv_io)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["source", "target", "weight"] {
            return Err(GraphError::Parse { line: 1, reason: "expected header source,target,weight".into() });
        }
        let mut g = WeightedDigraph::new(directed);
        for rec in rdr.records() {
            let rec = rec.map_err(csv_io)?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 3 {
                return Err(GraphError::Parse { line, reason: format!("expected 3 fields, got {}", rec.len()) });
            }
            let w: f64 = rec[2]
                .parse()
                .map_err(|_| GraphError::Parse { line, reason: format!("bad weight {:?}", &rec[2]) })?;
            g.add_weight(JournalId::new(&rec[0]), JournalId::new(&rec[1]), w)?;
        }
        Ok(g)
    }

    pub fn write_graphml<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
        writeln!(out, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
        writeln!(out, r#"  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>"#)?;
        let kind = if self.directed { "directed" } else { "undirected" };
        writeln!(out, r#"  <graph id="G" edgedefault="{kind}">"#)?;
        for n in &self.nodes {
            writeln!(out, r#"    <node id="{}"/>"#, xml_escape(n.as_str()))?;
        }
        for (i, (a, b, w)) in self.edges().enumerate() {
            writeln!(
                out,
                r#"    <edge id="e{i}" source="{}" target="{}"><data key="weight">{w}</data></edge>"#,
                xml_escape(a.as_str()),
                xml_escape(b.as_str()),
            )?;
        }
        writeln!(out, "  </graph>")?;
        writeln!(out, "</graphml>")
    }

    pub fn write_dot<W: Write>(&self, mut out: W) -> io::Result<()> {
        let (kw, arrow) = if self.directed { ("digraph", "->") } else { ("graph", "--") };
        writeln!(out, "{kw} G {{")?;
        for n in &self.nodes {
            writeln!(out, "  {};", dot_quote(n.as_str()))?;
        }
        for (a, b, w) in self.edges() {
            writeln!(out, "  {} {arrow} {} [weight={w}];", dot_quote(a.as_str()), dot_quote(b.as_str()))?;
        }
        writeln!(out, "}}")
    }
}

fn csv_io(e: csv::Error) -> GraphError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => GraphError::Io(io),
        other => GraphError::Parse { line: 0, reason: format!("{other:?}") },
    }
}

pub(crate) fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Adjacency-list view of a [`WeightedDigraph`] with nodes numbered by
/// their sorted journal id.
///
/// For undirected graphs `out` and `inc` hold the same lists.
#[derive(Debug, Clone)]
pub struct IndexedGraph {
    pub ids: Vec<JournalId>,
    pub out: Vec<Vec<(usize, f64)>>,
    pub inc: Vec<Vec<(usize, f64)>>,
    pub directed: bool,
}

impl IndexedGraph {
    fn from_graph(g: &WeightedDigraph) -> Self {
        let ids: Vec<JournalId> = g.nodes.iter().cloned().collect();
        let index: BTreeMap<&JournalId, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let n = ids.len();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for ((a, b), &w) in &g.edges {
            let (i, j) = (index[a], index[b]);
            out[i].push((j, w));
            inc[j].push((i, w));
            if !g.directed {
                out[j].push((i, w));
                inc[i].push((j, w));
            }
        }
        for list in out.iter_mut().chain(inc.iter_mut()) {
            list.sort_by_key(|&(j, _)| j);
        }
        IndexedGraph { ids, out, inc, directed: g.directed }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Symmetric adjacency ignoring direction; antiparallel directed edges
    /// have their weights summed.
    pub fn undirected_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        if !self.directed {
            return self.out.clone();
        }
        let mut merged: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); self.len()];
        for (i, list) in self.out.iter().enumerate() {
            for &(j, w) in list {
                *merged[i].entry(j).or_insert(0.0) += w;
                *merged[j].entry(i).or_insert(0.0) += w;
            }
        }
        merged.into_iter().map(|m| m.into_iter().collect()).collect()
    }

    /// Weakly connected components as node-index lists, each sorted, in
    /// order of their smallest member.
    pub fn weak_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(u, _) in self.out[v].iter().chain(self.inc[v].iter()) {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        members.push(u);
                        stack.push(u);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps
    }

    /// Size of the largest weakly connected component.
    pub fn largest_component_size(&self) -> usize {
        self.weak_components().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Strongly connected component label of every node (Tarjan, iterative).
    /// For undirected graphs this coincides with the connected components.
    pub fn strong_component_labels(&self) -> Vec<usize> {
        let n = self.len();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut label = vec![usize::MAX; n];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut next_label = 0;
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                if *pos < self.out[v].len() {
                    let w = self.out[v][*pos].0;
                    *pos += 1;
                    if index[w] == usize::MAX {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        loop {
                            let w = stack.pop().expect("tarjan stack");
                            on_stack[w] = false;
                            label[w] = next_label;
                            if w == v {
                                break;
                            }
                        }
                        next_label += 1;
                    }
                }
            }
        }
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(s: &str) -> JournalId {
        JournalId::new(s)
    }

    #[test]
    fn undirected_pairs_are_canonical() {
        let mut g = WeightedDigraph::undirected();
        g.add_weight(j("b"), j("a"), 1.0).unwrap();
        g.add_weight(j("a"), j("b"), 2.0).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(&j("a"), &j("b")), Some(3.0));
        assert_eq!(g.weight(&j("b"), &j("a")), Some(3.0));
        let (s, t, _) = g.edges().next().unwrap();
        assert!(s < t);
    }

    #[test]
    fn rejects_self_loops_and_bad_weights() {
        let mut g = WeightedDigraph::directed();
        assert!(matches!(g.add_weight(j("a"), j("a"), 1.0), Err(GraphError::SelfLoop(_))));
        assert!(matches!(g.add_weight(j("a"), j("b"), 0.0), Err(GraphError::BadWeight(..))));
        assert!(matches!(g.add_weight(j("a"), j("b"), f64::NAN), Err(GraphError::BadWeight(..))));
    }

    #[test]
    fn edge_list_round_trip() {
        let mut g = WeightedDigraph::directed();
        g.set_edge(j("x,1"), j("y"), 2.5).unwrap();
        g.set_edge(j("y"), j("x,1"), 7.0).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("source,target,weight\n"));
        let back = WeightedDigraph::read_edge_list(&buf[..], true).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edge_list_rejects_bad_header() {
        let err = WeightedDigraph::read_edge_list("a,b,c\nx,y,1\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 1, .. }));
    }

    #[test]
    fn graphml_is_well_formed() {
        let mut g = WeightedDigraph::undirected();
        g.set_edge(j("A&B"), j("<c>"), 1.0).unwrap();
        let mut buf = Vec::new();
        g.write_graphml(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("node")).count(), 2);
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("edge")).count(), 1);
    }

    #[test]
    fn strong_components_of_cycle_plus_tail() {
        let mut g = WeightedDigraph::directed();
        for (a, b) in [("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")] {
            g.set_edge(j(a), j(b), 1.0).unwrap();
        }
        let ig = g.indexed();
        let l = ig.strong_component_labels();
        assert_eq!(l[0], l[1]);
        assert_eq!(l[1], l[2]);
        assert_ne!(l[2], l[3]);
        assert_eq!(ig.weak_components().len(), 1);
    }
}
