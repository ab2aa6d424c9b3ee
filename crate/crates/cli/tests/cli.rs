use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn usagenet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_usagenet")).args(["--log", "off"]).args(args).output().expect("binary runs")
}

fn corpus(dir: &Path) -> String {
    let out = usagenet(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--sessions",
        "400",
        "--journals-per-community",
        "10",
        "--write-config",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("usagenet.toml").to_str().unwrap().to_owned()
}

const OUTPUTS: [&str; 13] = [
    "events.csv",
    "sessions.jsonl",
    "resolutions.csv",
    "usage_network.csv",
    "citation_network.csv",
    "metrics.csv",
    "correlations.csv",
    "pca.csv",
    "map.svg",
    "map.dot",
    "map.graphml",
    "layout.csv",
    "graph_params.json",
];

#[test]
fn run_then_stage_by_stage_match() {
    let dir = tempfile::tempdir().unwrap();
    let config = corpus(dir.path());
    let one = dir.path().join("one");
    let out = usagenet(&["run", "--config", &config, "--out", one.to_str().unwrap(), "--iterations", "60"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("run_report.json"));

    let steps = dir.path().join("steps");
    let s = steps.to_str().unwrap();
    for stage in ["ingest", "sessionize", "resolve", "build-net", "metrics", "correlate", "pca"] {
        let out = usagenet(&[stage, "--config", &config, "--out", s]);
        assert_eq!(out.status.code(), Some(0), "{stage}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = usagenet(&["map", "--config", &config, "--out", s, "--iterations", "60"]);
    assert_eq!(out.status.code(), Some(0));

    for f in OUTPUTS {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(steps.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = corpus(dir.path());
    let out_dir = dir.path().join("o");
    let o = out_dir.to_str().unwrap();
    assert!(usagenet(&["ingest", "--config", &config, "--out", o]).status.success());
    let out = usagenet(&["sessionize", "--config", &config, "--out", o, "--bot-max-length", "5"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("run_report.json")).unwrap()).unwrap();
    let robots = report["sessions"]["robot"].as_u64().unwrap();
    let total = report["sessions"]["sessions"].as_u64().unwrap();
    // Human sessions run to 30 requests, so a cap of 5 flags most of them.
    assert!(robots > total / 2, "{robots} of {total}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(usagenet(&["run", "--config", "/nonexistent/usagenet.toml"]).status.code(), Some(1));
    assert_eq!(usagenet(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(usagenet(&["--help"]).status.code(), Some(0));

    let config = corpus(dir.path());
    let fresh = dir.path().join("fresh");
    let out = usagenet(&["metrics", "--config", &config, "--out", fresh.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    assert_eq!(usagenet(&["run", "--config", &config, "--threshold", "1.5"]).status.code(), Some(1));

    let missing = dir.path().join("no_citations.csv");
    let partial = dir.path().join("partial");
    let out = usagenet(&[
        "run",
        "--config",
        &config,
        "--out",
        partial.to_str().unwrap(),
        "--citations",
        missing.to_str().unwrap(),
        "--iterations",
        "20",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(partial.join("metrics.csv")).unwrap();
    let header = table.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 24);
    assert!(!header.contains("CITE"));
}

#[test]
fn synth_writes_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = usagenet(&["synth", "--out", dir.path().to_str().unwrap(), "--sessions", "50", "--bot-fraction", "0"]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("truth_sessions.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| &r[4] == "false"));
    let bad = usagenet(&["synth", "--out", dir.path().to_str().unwrap(), "--bot-fraction", "2"]);
    assert_eq!(bad.status.code(), Some(1));
}
