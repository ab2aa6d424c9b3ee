use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{JournalId, WeightedDigraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub seed: u64,
    pub iterations: usize,
    pub area: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams { seed: 1, iterations: 500, area: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    /// Positions scaled into the unit square.
    pub positions: BTreeMap<JournalId, (f64, f64)>,
    pub seed: u64,
    pub iterations: usize,
    /// `ln(degree)`, 0 for a node without links.
    pub radii: BTreeMap<JournalId, f64>,
    /// Ideal edge length `sqrt(area / n)` in unit-square coordinates.
    pub k: f64,
}

/// Fruchterman-Reingold placement. Repulsion `k²/d` acts between every
/// pair, attraction `(w / w̄) · d²/k` along edges with `w̄` the mean edge
/// weight (direction ignored; uniform weights give the classic model), and
/// each step is capped by a temperature cooling linearly from a tenth of
/// the frame side to zero. All nodes move against the previous iteration's
/// positions, so the result depends only on the seed and parameters.
pub fn fr_layout(g: &WeightedDigraph, params: &LayoutParams) -> Layout {
    let ig = g.indexed();
    let n = ig.len();
    let side = params.area.sqrt();
    let k = (params.area / n.max(1) as f64).sqrt();
    let adj = ig.undirected_adjacency();
    let (total, links) = adj.iter().flatten().fold((0.0, 0usize), |(t, c), &(_, w)| (t + w, c + 1));
    let mean_weight = if links > 0 && total > 0.0 { total / links as f64 } else { 1.0 };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pos: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.random::<f64>() * side, rng.random::<f64>() * side)).collect();
    if n == 1 {
        pos[0] = (side / 2.0, side / 2.0);
    }

    for it in 0..params.iterations {
        if n < 2 {
            break;
        }
        let temp = 0.1 * side * (1.0 - it as f64 / params.iterations as f64);
        let snapshot = &pos;
        pos = (0..n)
            .into_par_iter()
            .map(|v| {
                let (px, py) = snapshot[v];
                let (mut dx, mut dy) = (0.0, 0.0);
                for (u, &(qx, qy)) in snapshot.iter().enumerate() {
                    if u == v {
                        continue;
                    }
                    let (mut ex, mut ey) = (px - qx, py - qy);
                    let mut d = (ex * ex + ey * ey).sqrt();
                    if d < 1e-9 * k {
                        // Coincident nodes: push apart along an index-derived direction.
                        let angle = (v * 7919 + u * 104729) as f64;
                        (ex, ey, d) = (angle.cos() * 1e-3 * k, angle.sin() * 1e-3 * k, 1e-3 * k);
                    }
                    let f = k * k / d;
                    dx += ex / d * f;
                    dy += ey / d * f;
                }
                for &(u, w) in &adj[v] {
                    let (ex, ey) = (px - snapshot[u].0, py - snapshot[u].1);
                    let d = (ex * ex + ey * ey).sqrt();
                    if d > 0.0 {
                        let f = w / mean_weight * d * d / k;
                        dx -= ex / d * f;
                        dy -= ey / d * f;
                    }
                }
                let len = (dx * dx + dy * dy).sqrt();
                let step = if len > 0.0 { len.min(temp) / len } else { 0.0 };
                ((px + dx * step).clamp(0.0, side), (py + dy * step).clamp(0.0, side))
            })
            .collect();
    }

    let scale = if side > 0.0 { 1.0 / side } else { 0.0 };
    let positions = ig.ids.iter().cloned().zip(pos.iter().map(|&(x, y)| (x * scale, y * scale))).collect();
    let radii = ig.ids.iter().cloned().zip(adj.iter().map(|l| (l.len().max(1) as f64).ln())).collect();
    Layout { positions, seed: params.seed, iterations: params.iterations, radii, k: k * scale }
}
