//! End-to-end runs of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn netrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netrec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = netrec(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn small_synth(dir: &Path, seed: &str, out: &str) {
    ok(&[
        "--out-dir",
        dir.to_str().unwrap(),
        "--seed",
        seed,
        "synth",
        "--users",
        "300",
        "--items",
        "10",
        "--events-per-step",
        "10",
        "--steps",
        "150",
        "--out",
        out,
    ]);
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "7", "a.tsv");
    let first_params = fs::read(dir.path().join("synth.params.json")).unwrap();
    small_synth(dir.path(), "7", "b.tsv");
    let a = fs::read(dir.path().join("a.tsv")).unwrap();
    let b = fs::read(dir.path().join("b.tsv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(
        first_params,
        fs::read(dir.path().join("synth.params.json")).unwrap()
    );
    small_synth(dir.path(), "8", "c.tsv");
    assert_ne!(a, fs::read(dir.path().join("c.tsv")).unwrap());
    let prov = json(&dir.path().join("synth.provenance.json"));
    assert_eq!(prov["resolved"]["seed"], 8);
}

#[test]
fn split_writes_a_sidecar_with_resolved_durations() {
    let dir = tempfile::tempdir().unwrap();
    let day = 86_400;
    let mut rows = String::new();
    for d in 0..20 {
        for u in 0..5 {
            rows.push_str(&format!(
                "user{u},item{d},{}\n",
                1_600_000_000 + d * day + u * 60
            ));
        }
    }
    let input = dir.path().join("raw.csv");
    fs::write(&input, rows).unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "--out-dir",
        out,
        "split",
        "--input",
        input.to_str().unwrap(),
        "--delimiter",
        "comma",
        "--time-unit",
        "second",
        "--kind",
        "time",
        "--tp",
        "0.95",
        "--delta-p",
        "1d",
    ]);
    let sidecar = json(&dir.path().join("split.json"));
    assert_eq!(sidecar["kind"], "time");
    assert_eq!(sidecar["delta_p"], day);
    let max_time = 19 * day + 4 * 60;
    assert_eq!(
        sidecar["probe_time"],
        (0.95 * max_time as f64).round() as i64
    );
    assert!(sidecar["cold_fraction"].as_f64().unwrap() >= 0.0);
    let probe = fs::read_to_string(dir.path().join("probe.tsv")).unwrap();
    let training = fs::read_to_string(dir.path().join("training.tsv")).unwrap();
    assert_eq!(
        probe.lines().count(),
        sidecar["probe_events"].as_u64().unwrap() as usize
    );
    assert_eq!(
        training.lines().count(),
        sidecar["training_events"].as_u64().unwrap() as usize
    );
    // original timestamps come back
    assert!(training
        .lines()
        .all(|l| l.split('\t').nth(2).unwrap().starts_with("16")));
    assert!(dir.path().join("split.provenance.json").exists());
}

#[test]
fn recommend_writes_ranked_lists() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "3", "events.tsv");
    let out = dir.path().to_str().unwrap();
    let input = dir.path().join("events.tsv");
    ok(&[
        "--out-dir",
        out,
        "recommend",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "thybrid",
        "--tau",
        "5",
        "--lambda",
        "0.4",
        "-L",
        "4",
        "--user",
        "u000001",
        "--user",
        "u000002",
    ]);
    let text = fs::read_to_string(dir.path().join("recommendations.tsv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "user_id\trank\titem_id\tscore");
    assert_eq!(lines.len(), 1 + 8);
    assert!(lines[1].starts_with("u000001\t1\t"));
    let prov = json(&dir.path().join("recommend.provenance.json"));
    assert_eq!(prov["resolved"]["method"]["method"], "thybrid");
    assert_eq!(prov["resolved"]["method"]["tau"], 5);
}

#[test]
fn evaluate_produces_table_shaped_csv() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "5", "events.tsv");
    let config = dir.path().join("experiment.toml");
    fs::write(
        &config,
        "methods = [\"probs\", \"di\", \"tprobs\"]\nprobes = 4\nrandom_probes = 2\n\
         [dataset]\nsource = \"file\"\npath = \"events.tsv\"\n[grid]\ntau = [2, 10]\n",
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "--out-dir",
        out,
        "--config",
        config.to_str().unwrap(),
        "calibrate",
    ]);
    ok(&[
        "--out-dir",
        out,
        "--config",
        config.to_str().unwrap(),
        "evaluate",
        "--params",
        dir.path().join("calibration.json").to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    for column in ["method", "recall", "ranking_score", "k_r"] {
        assert!(header.contains(&column), "{header:?}");
    }
    assert_eq!(csv.lines().count(), 1 + 4);
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
    let prov = json(&dir.path().join("evaluate.provenance.json"));
    assert_eq!(prov["resolved"]["config"]["probes"], 4);
    assert!(prov["resolved"]["dataset"]["events"].as_u64().unwrap() > 0);
}

#[test]
fn diagnose_reports_correlations_and_half_life() {
    let dir = tempfile::tempdir().unwrap();
    small_synth(dir.path(), "4", "events.tsv");
    let out = dir.path().to_str().unwrap();
    let input = dir.path().join("events.tsv");
    ok(&[
        "--out-dir",
        out,
        "diagnose",
        "--input",
        input.to_str().unwrap(),
        "--delta-p",
        "5",
        "--tau",
        "5",
    ]);
    let d = json(&dir.path().join("diagnostics.json"));
    for key in ["degree_vs_probe", "increase_vs_probe"] {
        let r = d["correlations"][key].as_f64().unwrap();
        assert!((-1.0..=1.0).contains(&r));
    }
    assert!(d["half_life"]["mean"].as_f64().unwrap() >= 0.0);
    let scatter = fs::read_to_string(dir.path().join("diagnostics.scatter.csv")).unwrap();
    assert_eq!(
        scatter.lines().next().unwrap(),
        "item_id,age,k_train,delta_k,k_probe"
    );
}

#[test]
fn ingest_filters_ratings_and_reorders_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ratings.csv");
    fs::write(
        &input,
        "t,rating,item,user\n10,5,x,alice\n20,2,y,alice\n30,4,y,bob\n",
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "--out-dir",
        out,
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--delimiter",
        "comma",
        "--header",
        "--columns",
        "3,2,0",
        "--rating-column",
        "1",
        "--rating-threshold",
        "4",
    ]);
    let events = fs::read_to_string(dir.path().join("events.tsv")).unwrap();
    assert_eq!(events, "alice\tx\t10\nbob\ty\t30\n");
    let summary = json(&dir.path().join("ingest.summary.json"));
    assert_eq!(summary["events"], 2);
}

#[test]
fn exit_codes_separate_usage_from_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(netrec(&["synth", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(netrec(&["teleport"]).status.code(), Some(2));
    let missing = netrec(&[
        "--out-dir",
        out,
        "split",
        "--input",
        "/definitely/missing.tsv",
    ]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error[io]"));
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "u\ti\tnot-a-time\n").unwrap();
    let parse = netrec(&["--out-dir", out, "split", "--input", bad.to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(4));
    assert_eq!(
        netrec(&["--out-dir", out, "calibrate"]).status.code(),
        Some(5)
    );
    assert_eq!(
        netrec(&[
            "--out-dir",
            out,
            "synth",
            "--users",
            "1",
            "--items",
            "1",
            "--steps",
            "1"
        ])
        .status
        .code(),
        Some(5)
    );
}
