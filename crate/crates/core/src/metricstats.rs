//! Rank correlation between metric rankings and the principal-component
//! map of the resulting correlation matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Read, Write};

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{xml_escape, JournalId};
use crate::metrics::{rank, MetricRanking};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("only {0} journals in common, need at least 3")]
    InsufficientOverlap(usize),
    #[error("a ranking has zero variance over the common journals")]
    UndefinedCorrelation,
    #[error("need at least 2 rankings, got {0}")]
    TooFewRankings(usize),
    #[error("requested {k} components from a {dim}x{dim} matrix")]
    BadDimension { k: usize, dim: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman coefficient over the journals present in both inputs: both are
/// re-ranked on that common set (ties averaged) and correlated with
/// Pearson's formula. Inputs may be scores or ranks, but both of the same
/// kind.
pub fn spearman(a: &BTreeMap<JournalId, f64>, b: &BTreeMap<JournalId, f64>) -> Result<f64, StatsError> {
    let (ra, rb): (BTreeMap<JournalId, f64>, BTreeMap<JournalId, f64>) =
        a.iter().filter_map(|(j, &x)| b.get(j).map(|&y| ((j.clone(), x), (j.clone(), y)))).unzip();
    if ra.len() < 3 {
        return Err(StatsError::InsufficientOverlap(ra.len()));
    }
    let x: Vec<f64> = rank(&ra).into_values().collect();
    let y: Vec<f64> = rank(&rb).into_values().collect();
    pearson(&x, &y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedCell {
    pub row: String,
    pub col: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    /// Row-major, symmetric with unit diagonal.
    pub values: Vec<Vec<f64>>,
    /// Journals present in every ranking.
    pub common_n: usize,
    /// Cells whose coefficient was undefined and set to 0.
    pub flagged: Vec<FlaggedCell>,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// Pairwise Spearman coefficients. A cell that cannot be computed is set to
/// 0 and listed in `flagged`; the matrix is still produced.
pub fn correlation_matrix(rankings: &[MetricRanking]) -> Result<CorrelationMatrix, StatsError> {
    let m = rankings.len();
    if m < 2 {
        return Err(StatsError::TooFewRankings(m));
    }
    let labels: Vec<String> = rankings.iter().map(MetricRanking::label).collect();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let cells: Vec<Result<f64, StatsError>> =
        pairs.par_iter().map(|&(i, j)| spearman(&rankings[i].scores, &rankings[j].scores)).collect();

    let mut values = vec![vec![0.0; m]; m];
    let mut flagged = Vec::new();
    for (i, row) in values.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for (&(i, j), cell) in pairs.iter().zip(cells) {
        let v = match cell {
            Ok(v) => v,
            Err(e) => {
                flagged.push(FlaggedCell { row: labels[i].clone(), col: labels[j].clone(), reason: e.to_string() });
                0.0
            }
        };
        values[i][j] = v;
        values[j][i] = v;
    }
    let common_n = rankings[0]
        .scores
        .keys()
        .filter(|j| rankings[1..].iter().all(|r| r.scores.contains_key(*j)))
        .count();
    Ok(CorrelationMatrix { labels, values, common_n, flagged })
}

pub fn write_correlation_matrix<W: Write>(out: W, c: &CorrelationMatrix) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["metric".to_owned()];
    header.extend(c.labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in c.labels.iter().zip(&c.values) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()
}

/// Reads a matrix written by [`write_correlation_matrix`]. Flags and the
/// common journal count are not stored and come back empty.
pub fn read_correlation_matrix<R: Read>(input: R) -> Result<CorrelationMatrix, StatsError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let parse_err = |line: u64, reason: String| StatsError::Parse { line, reason };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        rows.push(rec.map_err(|e| parse_err(i as u64 + 1, e.to_string()))?);
    }
    let Some((header, body)) = rows.split_first() else {
        return Err(parse_err(1, "empty matrix".into()));
    };
    let labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    if header.get(0) != Some("metric") || body.len() != labels.len() {
        return Err(parse_err(1, "expected a square matrix with a metric header".into()));
    }
    let mut values = Vec::new();
    for (i, rec) in body.iter().enumerate() {
        let line = i as u64 + 2;
        if rec.get(0) != Some(labels[i].as_str()) || rec.len() != labels.len() + 1 {
            return Err(parse_err(line, "row label or width mismatch".into()));
        }
        let row: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|s| s.parse().map_err(|_| parse_err(line, format!("bad value {s:?}"))))
            .collect::<Result<_, _>>()?;
        values.push(row);
    }
    Ok(CorrelationMatrix { labels, values, common_n: 0, flagged: Vec::new() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub labels: Vec<String>,
    /// Per metric, its loading on each of the first `k` components.
    pub coordinates: Vec<Vec<f64>>,
    /// All eigenvalues, descending, as computed (may hold tiny negatives).
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`, one per component.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Share of the total (negative eigenvalues clamped to 0) per component.
    pub explained: Vec<f64>,
}

impl PcaProjection {
    /// First two coordinates of each metric.
    pub fn xy(&self) -> Vec<(String, f64, f64)> {
        self.labels
            .iter()
            .zip(&self.coordinates)
            .map(|(l, c)| (l.clone(), c.first().copied().unwrap_or(0.0), c.get(1).copied().unwrap_or(0.0)))
            .collect()
    }
}

/// Symmetric eigendecomposition of `c`. Metric `i` sits at
/// `v_m[i] · sqrt(λ_m)` on component `m`. Each eigenvector is signed so
/// that its largest-magnitude entry (first one on ties) is positive.
pub fn pca(c: &CorrelationMatrix, k: usize) -> Result<PcaProjection, StatsError> {
    let dim = c.dim();
    if k > dim || dim == 0 {
        return Err(StatsError::BadDimension { k, dim });
    }
    if c.values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(StatsError::Numerical("matrix has non-finite entries".into()));
    }
    let m = Mat::from_fn(dim, dim, |i, j| c.values[i][j]);
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| StatsError::Numerical(format!("{e:?}")))?;
    let (u, s) = (evd.U(), evd.S().column_vector());

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut eigenvectors = Vec::with_capacity(dim);
    for col in (0..dim).rev() {
        let mut v: Vec<f64> = (0..dim).map(|i| u[(i, col)]).collect();
        let mut lead = 0;
        for i in 1..dim {
            if v[i].abs() > v[lead].abs() {
                lead = i;
            }
        }
        if v[lead] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvalues.push(s[col]);
        eigenvectors.push(v);
    }
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let explained = eigenvalues.iter().map(|l| if total > 0.0 { l.max(0.0) / total } else { 0.0 }).collect();
    let coordinates = (0..dim)
        .map(|i| (0..k).map(|m| eigenvectors[m][i] * eigenvalues[m].max(0.0).sqrt()).collect())
        .collect();
    Ok(PcaProjection { labels: c.labels.clone(), coordinates, eigenvalues, eigenvectors, explained })
}

/// `metric,x,y` rows followed by a `# explained,...` summary line.
pub fn write_pca<W: Write>(mut out: W, p: &PcaProjection) -> io::Result<()> {
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["metric", "x", "y"])?;
        for (l, x, y) in p.xy() {
            w.write_record([l, x.to_string(), y.to_string()])?;
        }
        w.flush()?;
    }
    let fractions: Vec<String> = p.explained.iter().map(f64::to_string).collect();
    writeln!(out, "# explained,{}", fractions.join(","))
}

/// Scatter of the first two components with one labeled point per metric.
pub fn pca_svg(p: &PcaProjection) -> String {
    const W: f64 = 800.0;
    const H: f64 = 640.0;
    const PAD: f64 = 70.0;
    let pts = p.xy();
    let extent = |f: fn(&(String, f64, f64)) -> f64| {
        let m = pts.iter().map(f).fold(0.0f64, |a, v| a.max(v.abs()));
        if m > 0.0 {
            m * 1.1
        } else {
            1.0
        }
    };
    let (ex, ey) = (extent(|t| t.1), extent(|t| t.2));
    let sx = |x: f64| W / 2.0 + x / ex * (W / 2.0 - PAD);
    let sy = |y: f64| H / 2.0 - y / ey * (H / 2.0 - PAD);
    let pct = |i: usize| p.explained.get(i).map_or(0.0, |e| e * 100.0);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<line x1="{PAD}" y1="{}" x2="{}" y2="{}" stroke="gray"/>"#, H / 2.0, W - PAD, H / 2.0);
    let _ = writeln!(s, r#"<line x1="{}" y1="{PAD}" x2="{}" y2="{}" stroke="gray"/>"#, W / 2.0, W / 2.0, H - PAD);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="14" text-anchor="end">PCA1 ({:.1}%)</text>"#,
        W - PAD,
        H / 2.0 + 20.0,
        pct(0)
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="14">PCA2 ({:.1}%)</text>"#, W / 2.0 + 6.0, PAD - 10.0, pct(1));
    for (label, x, y) in &pts {
        let color = if label.starts_with("CITE") { "#b2182b" } else { "#2166ac" };
        let (cx, cy) = (sx(*x), sy(*y));
        let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{color}"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
            cx + 6.0,
            cy - 4.0,
            xml_escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{MetricFamily, MetricSpec, Network, Scores};

    fn scores(v: &[f64]) -> Scores {
        v.iter().enumerate().map(|(i, &s)| (JournalId::new(format!("j{i:03}")), s)).collect()
    }

    fn matrix(values: Vec<Vec<f64>>) -> CorrelationMatrix {
        let labels = (0..values.len()).map(|i| format!("m{i}")).collect();
        CorrelationMatrix { labels, values, common_n: 0, flagged: Vec::new() }
    }

    #[test]
    fn spearman_examples() {
        let a = scores(&[1.0, 2.0, 3.0, 4.0]);
        assert!((spearman(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &scores(&[4.0, 3.0, 2.0, 1.0])).unwrap() + 1.0).abs() < 1e-12);
        let r = spearman(&a, &scores(&[1.0, 3.0, 2.0, 4.0])).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        let a = scores(&[1.0, 2.0]);
        assert!(matches!(spearman(&a, &a), Err(StatsError::InsufficientOverlap(2))));
        let flat = scores(&[1.0, 1.0, 1.0]);
        assert!(matches!(spearman(&flat, &scores(&[1.0, 2.0, 3.0])), Err(StatsError::UndefinedCorrelation)));
    }

    #[test]
    fn matrix_of_identical_rankings() {
        let spec = MetricSpec::new(Network::Usage, MetricFamily::InDegree, false, false).unwrap();
        let spec2 = MetricSpec::new(Network::Usage, MetricFamily::InDegree, true, false).unwrap();
        let flat = MetricSpec::new(Network::Usage, MetricFamily::OutDegree, true, false).unwrap();
        let r = [
            MetricRanking::new(spec, scores(&[1.0, 5.0, 3.0])),
            MetricRanking::new(spec2, scores(&[1.0, 5.0, 3.0])),
            MetricRanking::new(flat, scores(&[2.0, 2.0, 2.0])),
        ];
        let c = correlation_matrix(&r).unwrap();
        assert_eq!(c.values[0], vec![1.0, 1.0, 0.0]);
        assert_eq!(c.values[2][2], 1.0);
        assert_eq!(c.flagged.len(), 2);
        assert_eq!(c.common_n, 3);
        assert!(matches!(correlation_matrix(&r[..1]), Err(StatsError::TooFewRankings(1))));
    }

    #[test]
    fn pca_rank_one_and_identity() {
        let p = pca(&matrix(vec![vec![1.0, 1.0], vec![1.0, 1.0]]), 2).unwrap();
        assert!((p.eigenvalues[0] - 2.0).abs() < 1e-12);
        assert!(p.eigenvalues[1].abs() < 1e-12);
        assert!((p.explained[0] - 1.0).abs() < 1e-12);
        assert!(p.coordinates[0][0] > 0.0);

        let id: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| f64::from(u8::from(i == j))).collect()).collect();
        let p = pca(&matrix(id), 2).unwrap();
        for (l, e) in p.eigenvalues.iter().zip(&p.explained) {
            assert!((l - 1.0).abs() < 1e-12);
            assert!((e - 0.25).abs() < 1e-12);
        }
        assert!(pca(&matrix(vec![vec![1.0]]), 2).is_err());
    }

    #[test]
    fn matrix_and_pca_files() {
        let c = matrix(vec![vec![1.0, 0.5, 0.1], vec![0.5, 1.0, 0.3], vec![0.1, 0.3, 1.0]]);
        let mut buf = Vec::new();
        write_correlation_matrix(&mut buf, &c).unwrap();
        assert_eq!(read_correlation_matrix(buf.as_slice()).unwrap(), c);
        let p = pca(&c, 2).unwrap();
        let mut buf = Vec::new();
        write_pca(&mut buf, &p).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("metric,x,y\nm0,"));
        assert!(text.lines().last().unwrap().starts_with("# explained,"));
        let svg = pca_svg(&p);
        assert_eq!(svg.matches("<circle").count(), 3);
    }
}
