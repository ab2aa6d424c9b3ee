//! Metric specifications, the default registry and catalog evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{IndexedGraph, JournalId, WeightedDigraph};
use crate::ingest::{ArticleCountRecord, CitationRecord};

use super::flow::{current_flow_raw, current_flow_scale};
use super::impact::{impact_factor, IfExclusion};
use super::pagerank::{pagerank_raw, PageRankParams};
use super::paths::{betweenness_scale, closeness_scale, degree_indexed, entropy_indexed, path_sweep, Direction};
use super::{rank, MetricError, Scores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    Usage,
    Citation,
}

impl Network {
    pub fn as_str(self) -> &'static str {
        match self {
            Network::Usage => "usage",
            Network::Citation => "citation",
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Network::Usage => "USES",
            Network::Citation => "CITE",
        }
    }
}

impl FromStr for Network {
    type Err = MetricError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "usage" | "USES" => Ok(Network::Usage),
            "citation" | "CITE" => Ok(Network::Citation),
            _ => Err(MetricError::InvalidSpec(format!("unknown network {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MetricFamily {
    #[serde(rename = "ID")]
    InDegree,
    #[serde(rename = "OD")]
    OutDegree,
    #[serde(rename = "IE")]
    InEntropy,
    #[serde(rename = "OE")]
    OutEntropy,
    #[serde(rename = "CL")]
    Closeness,
    #[serde(rename = "BW")]
    Betweenness,
    #[serde(rename = "NM")]
    NewmanLoad,
    #[serde(rename = "PR")]
    PageRank,
    #[serde(rename = "IF")]
    ImpactFactor,
}

impl MetricFamily {
    pub const ALL: [MetricFamily; 9] = [
        MetricFamily::InDegree,
        MetricFamily::OutDegree,
        MetricFamily::InEntropy,
        MetricFamily::OutEntropy,
        MetricFamily::Closeness,
        MetricFamily::Betweenness,
        MetricFamily::NewmanLoad,
        MetricFamily::PageRank,
        MetricFamily::ImpactFactor,
    ];

    pub fn abbrev(self) -> &'static str {
        match self {
            MetricFamily::InDegree => "ID",
            MetricFamily::OutDegree => "OD",
            MetricFamily::InEntropy => "IE",
            MetricFamily::OutEntropy => "OE",
            MetricFamily::Closeness => "CL",
            MetricFamily::Betweenness => "BW",
            MetricFamily::NewmanLoad => "NM",
            MetricFamily::PageRank => "PR",
            MetricFamily::ImpactFactor => "IF",
        }
    }

    /// Whether the family has a largest-component normalized variant.
    pub fn normalizable(self) -> bool {
        matches!(
            self,
            MetricFamily::Closeness | MetricFamily::Betweenness | MetricFamily::NewmanLoad | MetricFamily::PageRank
        )
    }
}

impl FromStr for MetricFamily {
    type Err = MetricError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricFamily::ALL
            .into_iter()
            .find(|f| f.abbrev() == s)
            .ok_or_else(|| MetricError::InvalidSpec(format!("unknown metric family {s:?}")))
    }
}

/// One metric variant: a family on a network, optionally weighted and
/// optionally normalized by the size of the largest connected component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MetricSpec {
    pub network: Network,
    pub family: MetricFamily,
    pub weighted: bool,
    pub lcc_normalized: bool,
}

impl MetricSpec {
    pub fn new(network: Network, family: MetricFamily, weighted: bool, lcc_normalized: bool) -> Result<Self, MetricError> {
        let spec = MetricSpec { network, family, weighted, lcc_normalized };
        spec.validate()?;
        Ok(spec)
    }

    pub fn impact_factor() -> Self {
        MetricSpec { network: Network::Citation, family: MetricFamily::ImpactFactor, weighted: false, lcc_normalized: false }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if self.family == MetricFamily::ImpactFactor
            && (self.network != Network::Citation || self.weighted || self.lcc_normalized)
        {
            return Err(MetricError::InvalidSpec("IF is an unweighted, unnormalized citation metric".into()));
        }
        if self.lcc_normalized && !self.family.normalizable() {
            return Err(MetricError::InvalidSpec(format!("{} has no normalized variant", self.family.abbrev())));
        }
        Ok(())
    }

    /// `USES_BW_W_UN` style label: network, family, `W` when weighted and
    /// `UN` when a normalizable family is left unnormalized.
    pub fn label(&self) -> String {
        let mut s = format!("{}_{}", self.network.prefix(), self.family.abbrev());
        if self.weighted {
            s.push_str("_W");
        }
        if self.family.normalizable() && !self.lcc_normalized {
            s.push_str("_UN");
        }
        s
    }

    pub fn from_label(label: &str) -> Result<Self, MetricError> {
        let bad = || MetricError::InvalidSpec(format!("bad metric label {label:?}"));
        let mut parts = label.split('_');
        let network: Network = parts.next().ok_or_else(bad)?.parse()?;
        let family: MetricFamily = parts.next().ok_or_else(bad)?.parse()?;
        let rest: Vec<&str> = parts.collect();
        let (weighted, un) = match rest.as_slice() {
            [] => (false, false),
            ["W"] => (true, false),
            ["UN"] => (false, true),
            ["W", "UN"] => (true, true),
            _ => return Err(bad()),
        };
        if un && !family.normalizable() {
            return Err(bad());
        }
        MetricSpec::new(network, family, weighted, family.normalizable() && !un)
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// 23 variants per network plus the Impact Factor: degree and entropy
/// families weighted and unweighted; closeness, betweenness and PageRank
/// in all four weighted/normalized combinations; Newman's load unweighted
/// (both normalizations) and weighted normalized.
pub fn default_registry() -> Vec<MetricSpec> {
    use MetricFamily::*;
    let mut specs = Vec::with_capacity(47);
    for network in [Network::Usage, Network::Citation] {
        let mut push = |family, weighted, norm| specs.push(MetricSpec { network, family, weighted, lcc_normalized: norm });
        for family in [InDegree, OutDegree, InEntropy, OutEntropy] {
            for weighted in [false, true] {
                push(family, weighted, false);
            }
        }
        for family in [Closeness, Betweenness, PageRank] {
            for weighted in [false, true] {
                for norm in [true, false] {
                    push(family, weighted, norm);
                }
            }
        }
        push(NewmanLoad, false, false);
        push(NewmanLoad, false, true);
        push(NewmanLoad, true, true);
    }
    specs.push(MetricSpec::impact_factor());
    specs
}

const REGISTRY_HEADER: [&str; 4] = ["network", "family", "weighted", "lcc_normalized"];

/// Reads a `network,family,weighted,lcc_normalized` registry file.
pub fn read_registry<R: Read>(input: R) -> Result<Vec<MetricSpec>, MetricError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut specs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 1;
        let rec = rec.map_err(|e| MetricError::Parse { line, reason: e.to_string() })?;
        if i == 0 {
            if rec.iter().collect::<Vec<_>>() != REGISTRY_HEADER {
                return Err(MetricError::Parse { line, reason: format!("expected header {}", REGISTRY_HEADER.join(",")) });
            }
            continue;
        }
        if rec.len() != 4 {
            return Err(MetricError::Parse { line, reason: "expected 4 fields".into() });
        }
        let flag = |s: &str| {
            s.parse::<bool>().map_err(|_| MetricError::Parse { line, reason: format!("bad flag {s:?}") })
        };
        let spec = MetricSpec::new(rec[0].parse()?, rec[1].parse()?, flag(&rec[2])?, flag(&rec[3])?)
            .map_err(|e| MetricError::Parse { line, reason: e.to_string() })?;
        specs.push(spec);
    }
    Ok(specs)
}

pub fn write_registry<W: Write>(out: W, specs: &[MetricSpec]) -> Result<(), MetricError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| MetricError::Io(e.into());
    w.write_record(REGISTRY_HEADER).map_err(io)?;
    for s in specs {
        w.write_record([s.network.as_str(), s.family.abbrev(), &s.weighted.to_string(), &s.lcc_normalized.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRanking {
    pub spec: MetricSpec,
    pub scores: Scores,
    pub ranks: BTreeMap<JournalId, f64>,
}

impl MetricRanking {
    pub fn new(spec: MetricSpec, scores: Scores) -> Self {
        let ranks = rank(&scores);
        MetricRanking { spec, scores, ranks }
    }

    pub fn label(&self) -> String {
        self.spec.label()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ImpactInputs<'a> {
    pub citations: &'a [CitationRecord],
    pub counts: &'a [ArticleCountRecord],
    pub census_year: i32,
    pub window: &'a BTreeSet<i32>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CatalogInputs<'a> {
    pub usage: Option<&'a WeightedDigraph>,
    pub citation: Option<&'a WeightedDigraph>,
    pub impact: Option<ImpactInputs<'a>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CatalogParams {
    pub pagerank: PageRankParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricFailure {
    pub label: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    /// In registry order, restricted to `common` and ranked there.
    pub rankings: Vec<MetricRanking>,
    /// Journals present in every available network.
    pub common: BTreeSet<JournalId>,
    pub failures: Vec<MetricFailure>,
    pub skipped: Vec<MetricFailure>,
    pub warnings: Vec<String>,
    pub if_excluded: Vec<IfExclusion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Base {
    Paths(bool),
    Flow(bool),
    Rank(bool),
}

enum BaseValue {
    Paths(Vec<f64>, Vec<f64>),
    Flow(Result<Vec<f64>, String>),
    Rank(Result<(Vec<f64>, bool, usize, f64), String>),
}

fn compute_base(g: &IndexedGraph, base: Base, params: &CatalogParams) -> BaseValue {
    match base {
        Base::Paths(w) => {
            let s = path_sweep(g, w);
            BaseValue::Paths(s.closeness, s.betweenness)
        }
        Base::Flow(w) => BaseValue::Flow(current_flow_raw(g, w).map_err(|e| e.to_string())),
        Base::Rank(w) => BaseValue::Rank(
            pagerank_raw(g, w, &params.pagerank)
                .map(|r| (r.scores, r.converged, r.iterations, r.residual))
                .map_err(|e| e.to_string()),
        ),
    }
}

fn network_scores(
    g: &WeightedDigraph,
    specs: &[MetricSpec],
    params: &CatalogParams,
    catalog: &mut Catalog,
) -> Vec<Option<Scores>> {
    let ig = g.indexed();
    let lcc = ig.largest_component_size();
    let mut bases: Vec<Base> = specs
        .iter()
        .filter_map(|s| match s.family {
            MetricFamily::Closeness | MetricFamily::Betweenness => Some(Base::Paths(s.weighted)),
            MetricFamily::NewmanLoad => Some(Base::Flow(s.weighted)),
            MetricFamily::PageRank => Some(Base::Rank(s.weighted)),
            _ => None,
        })
        .collect();
    let mut seen = HashSet::new();
    bases.retain(|b| seen.insert(*b));
    let computed: HashMap<Base, BaseValue> =
        bases.par_iter().map(|&b| (b, compute_base(&ig, b, params))).collect::<Vec<_>>().into_iter().collect();

    let scaled = |v: &[f64], k: f64| v.iter().map(|x| x * k).collect::<Vec<f64>>();
    specs
        .iter()
        .map(|spec| {
            let w = spec.weighted;
            let values = match spec.family {
                MetricFamily::InDegree => degree_indexed(&ig, Direction::In, w),
                MetricFamily::OutDegree => degree_indexed(&ig, Direction::Out, w),
                MetricFamily::InEntropy => entropy_indexed(&ig, Direction::In, w),
                MetricFamily::OutEntropy => entropy_indexed(&ig, Direction::Out, w),
                MetricFamily::Closeness | MetricFamily::Betweenness => {
                    let BaseValue::Paths(cl, bw) = &computed[&Base::Paths(w)] else { unreachable!() };
                    match (spec.family, spec.lcc_normalized) {
                        (MetricFamily::Closeness, false) => cl.clone(),
                        (MetricFamily::Closeness, true) => scaled(cl, closeness_scale(lcc)),
                        (_, false) => bw.clone(),
                        (_, true) => scaled(bw, betweenness_scale(lcc, ig.directed)),
                    }
                }
                MetricFamily::NewmanLoad => match &computed[&Base::Flow(w)] {
                    BaseValue::Flow(Ok(v)) if spec.lcc_normalized => scaled(v, current_flow_scale(lcc)),
                    BaseValue::Flow(Ok(v)) => v.clone(),
                    BaseValue::Flow(Err(e)) => {
                        catalog.failures.push(MetricFailure { label: spec.label(), reason: e.clone() });
                        return None;
                    }
                    _ => unreachable!(),
                },
                MetricFamily::PageRank => match &computed[&Base::Rank(w)] {
                    BaseValue::Rank(Ok((v, converged, iters, residual))) => {
                        if !converged {
                            catalog.warnings.push(format!(
                                "{}: no convergence after {iters} iterations (residual {residual:e})",
                                spec.label()
                            ));
                        }
                        if spec.lcc_normalized {
                            scaled(v, lcc as f64)
                        } else {
                            v.clone()
                        }
                    }
                    BaseValue::Rank(Err(e)) => {
                        catalog.failures.push(MetricFailure { label: spec.label(), reason: e.clone() });
                        return None;
                    }
                    _ => unreachable!(),
                },
                MetricFamily::ImpactFactor => unreachable!("handled separately"),
            };
            Some(ig.ids.iter().cloned().zip(values).collect())
        })
        .collect()
}

/// Evaluates every spec of `registry` on the networks that are present.
/// Specs whose network (or Impact Factor inputs) is missing are skipped,
/// numerical failures are recorded; neither stops the catalog. Rankings are
/// restricted to the journals common to all present networks.
pub fn run_catalog(inputs: &CatalogInputs<'_>, registry: &[MetricSpec], params: &CatalogParams) -> Catalog {
    let mut catalog = Catalog::default();
    let present: Vec<&WeightedDigraph> = [inputs.usage, inputs.citation].into_iter().flatten().collect();
    if let Some((first, rest)) = present.split_first() {
        catalog.common = first.node_set().iter().filter(|j| rest.iter().all(|g| g.contains_node(j))).cloned().collect();
    }

    let mut results: Vec<Option<Scores>> = vec![None; registry.len()];
    for (network, graph) in [(Network::Usage, inputs.usage), (Network::Citation, inputs.citation)] {
        let idx: Vec<usize> = (0..registry.len())
            .filter(|&i| registry[i].network == network && registry[i].family != MetricFamily::ImpactFactor)
            .collect();
        let Some(g) = graph else {
            for &i in &idx {
                catalog.skipped.push(MetricFailure {
                    label: registry[i].label(),
                    reason: format!("{} network unavailable", network.as_str()),
                });
            }
            continue;
        };
        let specs: Vec<MetricSpec> = idx.iter().map(|&i| registry[i]).collect();
        for (i, s) in idx.into_iter().zip(network_scores(g, &specs, params, &mut catalog)) {
            results[i] = s;
        }
    }

    for (i, spec) in registry.iter().enumerate() {
        if spec.family != MetricFamily::ImpactFactor {
            continue;
        }
        match (inputs.impact, inputs.citation) {
            (Some(imp), Some(_)) => {
                let r = impact_factor(imp.citations, imp.counts, imp.census_year, imp.window);
                catalog.if_excluded = r.excluded;
                results[i] = Some(r.scores);
            }
            _ => catalog.skipped.push(MetricFailure {
                label: spec.label(),
                reason: "citation network or article counts unavailable".into(),
            }),
        }
    }

    for (spec, scores) in registry.iter().zip(results) {
        if let Some(scores) = scores {
            let restricted: Scores = scores.into_iter().filter(|(j, _)| catalog.common.contains(j)).collect();
            catalog.rankings.push(MetricRanking::new(*spec, restricted));
        }
    }
    catalog
}

/// Writes `journal_id,<label>...` with one row per journal in any ranking.
/// Scores use the shortest decimal form that reads back to the same value;
/// a journal missing from a ranking has an empty cell.
pub fn write_metrics_table<W: Write>(out: W, rankings: &[MetricRanking]) -> Result<(), MetricError> {
    let io = |e: csv::Error| MetricError::Io(e.into());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["journal_id".to_owned()];
    header.extend(rankings.iter().map(MetricRanking::label));
    w.write_record(&header).map_err(io)?;
    let journals: BTreeSet<&JournalId> = rankings.iter().flat_map(|r| r.scores.keys()).collect();
    for j in journals {
        let mut row = vec![j.as_str().to_owned()];
        row.extend(rankings.iter().map(|r| r.scores.get(j).map(f64::to_string).unwrap_or_default()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_metrics_table`], recomputing ranks.
pub fn read_metrics_table<R: Read>(input: R) -> Result<Vec<MetricRanking>, MetricError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| MetricError::Parse { line: 1, reason: e.to_string() })?,
        None => return Err(MetricError::Parse { line: 1, reason: "empty metrics table".into() }),
    };
    if header.get(0) != Some("journal_id") {
        return Err(MetricError::Parse { line: 1, reason: "first column must be journal_id".into() });
    }
    let specs: Vec<MetricSpec> = header.iter().skip(1).map(MetricSpec::from_label).collect::<Result<_, _>>()?;
    let mut scores: Vec<Scores> = vec![Scores::new(); specs.len()];
    for (i, rec) in records.enumerate() {
        let line = i as u64 + 2;
        let rec = rec.map_err(|e| MetricError::Parse { line, reason: e.to_string() })?;
        let j = JournalId::new(&rec[0]);
        for (k, cell) in rec.iter().skip(1).enumerate() {
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| MetricError::Parse { line, reason: format!("bad score {cell:?}") })?;
            scores[k].insert(j.clone(), v);
        }
    }
    Ok(specs.into_iter().zip(scores).map(|(s, sc)| MetricRanking::new(s, sc)).collect())
}
