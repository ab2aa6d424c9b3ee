//! Kernel-versus-oracle comparisons shared by the centrality suites.

use usagenet::metrics::{
    self, CatalogInputs, CatalogParams, Direction, MetricFamily, MetricSpec, Network, PageRankParams, Scores,
};

use super::{betweenness, closeness, current_flow, degree, entropy, largest_weak, name, pagerank, SmallGraph};

/// Agreement required between a kernel and its oracle.
pub const KERNEL_TOL: f64 = 1e-8;

pub fn tight_pagerank() -> PageRankParams {
    PageRankParams { damping: 0.85, tol: 1e-15, max_iter: 10_000 }
}

fn compare(out: &mut Vec<String>, what: &str, g: &SmallGraph, got: &Scores, want: &[f64]) {
    if got.len() != want.len() {
        out.push(format!("{what}: {} scores for {} nodes", got.len(), want.len()));
        return;
    }
    for (i, w) in want.iter().enumerate() {
        let v = got[&name(i)];
        if (v - w).abs() > KERNEL_TOL {
            out.push(format!("{what} node {i}: {v} vs oracle {w} on {g:?}"));
        }
    }
}

/// Mismatches between every public kernel and its oracle on `g`.
pub fn kernel_mismatches(g: &SmallGraph) -> Vec<String> {
    let mut out = Vec::new();
    let wg = g.to_graph();
    for weighted in [false, true] {
        for (dir, incoming) in [(Direction::In, true), (Direction::Out, false)] {
            compare(&mut out, "degree", g, &metrics::degree(&wg, dir, weighted), &degree(g, incoming, weighted));
            compare(&mut out, "entropy", g, &metrics::degree_entropy(&wg, dir, weighted), &entropy(g, incoming, weighted));
        }
        for norm in [false, true] {
            compare(&mut out, "closeness", g, &metrics::closeness(&wg, weighted, norm), &closeness(g, weighted, norm));
            compare(&mut out, "betweenness", g, &metrics::betweenness(&wg, weighted, norm), &betweenness(g, weighted, norm));
            compare(&mut out, "newman", g, &metrics::newman_load(&wg, weighted, norm).unwrap(), &current_flow(g, weighted, norm));
        }
        let pr = metrics::pagerank(&wg, weighted, &tight_pagerank()).unwrap();
        compare(&mut out, "pagerank", g, &pr.scores, &pagerank(g, weighted, 0.85));
    }
    out
}

/// Oracle values for a catalog spec.
pub fn oracle(g: &SmallGraph, spec: &MetricSpec) -> Vec<f64> {
    let (w, norm) = (spec.weighted, spec.lcc_normalized);
    match spec.family {
        MetricFamily::InDegree => degree(g, true, w),
        MetricFamily::OutDegree => degree(g, false, w),
        MetricFamily::InEntropy => entropy(g, true, w),
        MetricFamily::OutEntropy => entropy(g, false, w),
        MetricFamily::Closeness => closeness(g, w, norm),
        MetricFamily::Betweenness => betweenness(g, w, norm),
        MetricFamily::NewmanLoad => current_flow(g, w, norm),
        MetricFamily::PageRank => {
            let k = if norm { largest_weak(g) as f64 } else { 1.0 };
            pagerank(g, w, 0.85).into_iter().map(|x| x * k).collect()
        }
        MetricFamily::ImpactFactor => unreachable!(),
    }
}

/// Every family and flag combination through the catalog.
pub fn all_specs(network: Network) -> Vec<MetricSpec> {
    let mut specs = Vec::new();
    for family in MetricFamily::ALL {
        if family == MetricFamily::ImpactFactor {
            continue;
        }
        for weighted in [false, true] {
            for norm in [false, true] {
                if norm && !family.normalizable() {
                    continue;
                }
                specs.push(MetricSpec::new(network, family, weighted, norm).unwrap());
            }
        }
    }
    specs
}

/// Mismatches of every family and flag combination run through the
/// catalog on `g`.
pub fn catalog_mismatches(g: &SmallGraph) -> Vec<String> {
    let mut out = Vec::new();
    let wg = g.to_graph();
    let (network, inputs) = if g.directed {
        (Network::Citation, CatalogInputs { citation: Some(&wg), ..Default::default() })
    } else {
        (Network::Usage, CatalogInputs { usage: Some(&wg), ..Default::default() })
    };
    let specs = all_specs(network);
    let cat = metrics::run_catalog(&inputs, &specs, &CatalogParams { pagerank: tight_pagerank() });
    out.extend(cat.failures.iter().map(|f| format!("{f:?}")));
    if cat.rankings.len() != specs.len() {
        out.push(format!("{} rankings for {} specs", cat.rankings.len(), specs.len()));
    }
    for r in &cat.rankings {
        compare(&mut out, &r.label(), g, &r.scores, &oracle(g, &r.spec));
    }
    out
}
