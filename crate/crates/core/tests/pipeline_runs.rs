//! Whole-pipeline runs on generated corpora: what the outputs may contain,
//! whether the generator produces what it claims, and reproducibility.

mod common;

use std::collections::BTreeMap;
use std::fs;

use usagenet::ingest::Timestamp;
use usagenet::pipeline::{run_pipeline, PipelineConfig};
use usagenet::scimap::LayoutParams;
use usagenet::synth::{read_session_truth, synth_journals, CorpusPaths, SynthSpec};

fn quick(mut cfg: PipelineConfig) -> PipelineConfig {
    cfg.layout = LayoutParams { iterations: 60, ..Default::default() };
    cfg
}

#[test]
fn outputs_never_carry_raw_agents_or_the_salt() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec { sessions: 900, journals_per_community: 10, ..Default::default() };
    let cfg = quick(common::corpus_config(dir.path(), &spec));
    run_pipeline(&cfg).unwrap();

    let truth = read_session_truth(&CorpusPaths::in_dir(&dir.path().join("corpus")).truth_sessions).unwrap();
    let agents: Vec<String> = {
        let mut a: Vec<String> = truth.iter().map(|t| t.agent_id.clone()).collect();
        a.sort();
        a.dedup();
        a
    };
    assert!(agents.len() > 100);
    let salt = format!("salt-{}", spec.seed);
    for rel in common::files_under(&cfg.output_dir) {
        let text = String::from_utf8_lossy(&fs::read(cfg.output_dir.join(&rel)).unwrap()).into_owned();
        assert!(!text.contains(&salt), "{} holds the salt", rel.display());
        for a in &agents {
            assert!(!text.contains(&format!("{a},")) && !text.contains(&format!("\"{a}\"")), "{} holds {a}", rel.display());
        }
    }
    let mut events = csv::Reader::from_path(cfg.output_dir.join("events.csv")).unwrap();
    for rec in events.records().take(500) {
        let hash = &rec.unwrap()[2];
        assert!(hash.is_empty() || (hash.len() == 32 && hash.chars().all(|c| c.is_ascii_hexdigit())), "{hash}");
    }
}

/// Bound of `k` standard deviations around an expected mean.
fn within(observed: f64, expected: f64, sd: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * sd
}

#[test]
fn generator_matches_its_specification() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec { sessions: 6000, journals_per_community: 20, ..Default::default() };
    let paths = CorpusPaths::in_dir(dir.path());
    usagenet::synth::generate_corpus(&spec, dir.path()).unwrap();
    let truth = read_session_truth(&paths.truth_sessions).unwrap();
    let community: BTreeMap<String, usize> =
        synth_journals(&spec).into_iter().map(|j| (j.id.to_string(), j.community)).collect();

    let mut rows = csv::Reader::from_path(&paths.usage).unwrap();
    let rows: Vec<(i64, String)> = rows
        .records()
        .map(|r| {
            let r = r.unwrap();
            let t = Timestamp::parse_rfc3339(&r[2]).unwrap().seconds();
            (t, r[3].split('-').next().unwrap().to_owned())
        })
        .collect();
    assert_eq!(rows.len(), truth.iter().map(|t| t.events).sum::<usize>());

    let n = truth.len() as f64;
    let bots = truth.iter().filter(|t| t.is_bot).count() as f64;
    let p = spec.bot_fraction;
    assert!(within(bots / n, p, (p * (1.0 - p) / n).sqrt(), 5.0), "bot share {}", bots / n);

    let humans: Vec<_> = truth.iter().filter(|t| !t.is_bot).collect();
    let (a, b) = spec.human_events;
    let mean_len = humans.iter().map(|t| t.events as f64).sum::<f64>() / humans.len() as f64;
    let var = (((b - a + 1) * (b - a + 1)) as f64 - 1.0) / 12.0;
    assert!(within(mean_len, (a + b) as f64 / 2.0, (var / humans.len() as f64).sqrt(), 5.0), "mean length {mean_len}");

    let (mut away, mut total) = (0usize, 0usize);
    for t in &truth {
        let start = t.first_event_seq as usize;
        let events = &rows[start..start + t.events];
        let gaps: Vec<i64> = events.windows(2).map(|w| w[1].0 - w[0].0).collect();
        if t.is_bot {
            assert!((spec.bot_events.0..=spec.bot_events.1).contains(&t.events));
            let mut sorted = gaps.clone();
            sorted.sort_unstable();
            assert!(sorted[sorted.len() / 2] == 0, "bot session {} is not bursty", t.session);
        } else {
            assert!(gaps.iter().all(|g| (spec.human_gap_secs.0..=spec.human_gap_secs.1).contains(g)));
            let home = t.community.unwrap();
            away += events.iter().filter(|(_, j)| community[j] != home).count();
            total += events.len();
        }
    }
    // Repeats copy the previous request, which inflates the variance by at
    // most (1 + r) / (1 - r).
    let eps = spec.cross_community_prob;
    let r = spec.repeat_prob;
    let sd = (eps * (1.0 - eps) / total as f64 * (1.0 + r) / (1.0 - r)).sqrt();
    let observed = away as f64 / total as f64;
    assert!(within(observed, eps, sd, 5.0), "cross-community share {observed}");
}

#[test]
fn runs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec { sessions: 1500, journals_per_community: 12, communities: 3, ..Default::default() };
    let base = quick(common::corpus_config(dir.path(), &spec));
    let one = PipelineConfig { output_dir: dir.path().join("one"), workers: Some(1), ..base.clone() };
    let three = PipelineConfig { output_dir: dir.path().join("three"), workers: Some(3), ..base };
    let ra = run_pipeline(&one).unwrap();
    let rb = run_pipeline(&three).unwrap();
    assert_eq!(ra.catalog, rb.catalog);

    let files = common::files_under(&one.output_dir);
    assert_eq!(files, common::files_under(&three.output_dir));
    assert!(files.len() > 20);
    for rel in files {
        if rel.ends_with("run_report.json") {
            continue;
        }
        let (a, b) = (fs::read(one.output_dir.join(&rel)).unwrap(), fs::read(three.output_dir.join(&rel)).unwrap());
        assert!(a == b, "{} differs", rel.display());
    }
}
