//! End-to-end tests of the command-line surface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_multiarm")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

#[test]
fn solve_single_detector_record() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(&scores, "sample_id,source,valid,det\ns0,natural,1,0.7\n").unwrap();
    let out = run(&["solve", "--scores", scores.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sample_id,source,w_det,capacity_nats,p_adversarial,converged"
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "s0");
    assert_eq!(fields[2].parse::<f64>().unwrap(), 1.0);
    assert!(fields[3].parse::<f64>().unwrap().abs() < 1e-9);
    assert_eq!(fields[5], "1");
}

#[test]
fn solve_symmetric_pair_splits_weight() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(&scores, "sample_id,source,valid,a,b\ns0,pgd,1,0.1,0.9\n").unwrap();
    let out = run(&["solve", "--scores", scores.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let w_a: f64 = fields[2].parse().unwrap();
    let w_b: f64 = fields[3].parse().unwrap();
    assert!((w_a - 0.5).abs() < 1e-6 && (w_b - 0.5).abs() < 1e-6);
}

#[test]
fn solve_gamma_adds_verdict_column() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(
        &scores,
        "sample_id,source,valid,det\ns0,pgd,1,0.8\ns1,pgd,1,0.2\n",
    )
    .unwrap();
    let out = run(&[
        "solve",
        "--scores",
        scores.to_str().unwrap(),
        "--gamma",
        "0.5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].ends_with(",verdict"));
    assert!(lines[1].ends_with(",1"));
    assert!(lines[2].ends_with(",0"));
}

#[test]
fn solve_rejects_malformed_csv_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(&scores, "sample_id,source,valid,det\ns0,pgd,1,1.3\n").unwrap();
    let out = run(&["solve", "--scores", scores.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn evaluate_reports_separable_group() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    let mut csv = String::from("sample_id,source,valid,det\n");
    for i in 0..10 {
        csv.push_str(&format!("s{i},natural,1,0.1\n"));
        csv.push_str(&format!("s{i},pgd,1,0.9\n"));
    }
    fs::write(&scores, csv).unwrap();
    let manifest = dir.path().join("manifest.json");
    fs::write(
        &manifest,
        r#"{"groups":[{"name":"g","attacks":["pgd"],"algorithm":"PGD","loss":"ACE","norm":"Linf","epsilon":0.125}]}"#,
    )
    .unwrap();
    let out = run(&[
        "evaluate",
        "--scores",
        scores.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports[0]["group_id"], "g");
    assert_eq!(reports[0]["auroc"], 1.0);
    assert_eq!(reports[0]["fpr_at_95_tpr"], 0.0);
    assert_eq!(reports[0]["n_natural"], 10);

    // --percent renders x100
    let out = run(&[
        "evaluate",
        "--scores",
        scores.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--percent",
    ]);
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports[0]["auroc"], 100.0);
}

#[test]
fn evaluate_rejects_unknown_attack_id() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(
        &scores,
        "sample_id,source,valid,det\ns0,natural,1,0.1\ns0,pgd,1,0.9\n",
    )
    .unwrap();
    let manifest = dir.path().join("manifest.json");
    fs::write(
        &manifest,
        r#"{"groups":[{"name":"g","attacks":["hopskip"],"algorithm":"HOP","loss":"-","norm":"L2","epsilon":null}]}"#,
    )
    .unwrap();
    let out = run(&[
        "evaluate",
        "--scores",
        scores.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("hopskip"), "stderr: {err}");
}

#[test]
fn evaluate_skips_group_with_no_valid_attacks() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    fs::write(
        &scores,
        "sample_id,source,valid,det\n\
         s0,natural,1,0.1\n\
         s0,pgd,0,0.9\n\
         s0,fgsm,1,0.8\n",
    )
    .unwrap();
    let manifest = dir.path().join("manifest.json");
    fs::write(
        &manifest,
        r#"{"groups":[
            {"name":"dead","attacks":["pgd"],"algorithm":"PGD","loss":"ACE","norm":"Linf","epsilon":0.125},
            {"name":"live","attacks":["fgsm"],"algorithm":"FGSM","loss":"ACE","norm":"Linf","epsilon":0.125}
        ]}"#,
    )
    .unwrap();
    let out = run(&[
        "evaluate",
        "--scores",
        scores.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("dead"), "expected skip warning, got: {err}");
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    assert_eq!(reports[0]["group_id"], "live");
}

#[test]
fn simulate_rejects_empty_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"n_samples":0,"detector_ids":["d"],"attack_ids":["a"],"skill":{"skills":{},"natural_shape":{}},"seed":1}"#,
    )
    .unwrap();
    let out = run(&["simulate", spec.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn simulate_seed_flag_overrides_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"n_samples":3,"detector_ids":["d"],"attack_ids":["a"],"skill":{"skills":{},"natural_shape":{}},"seed":1}"#,
    )
    .unwrap();
    let base = run(&["simulate", spec.to_str().unwrap()]);
    let same = run(&["simulate", spec.to_str().unwrap(), "--seed", "1"]);
    let other = run(&["simulate", spec.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(base.stdout, same.stdout);
    assert_ne!(base.stdout, other.stdout);
}

#[test]
fn shift_bound_identical_domains() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("instance.json");
    fs::write(
        &inst,
        r#"{
            "source_dist": {"support":["a","b"],"probs":[0.4,0.6]},
            "target_dist": {"support":["a","b"],"probs":[0.4,0.6]},
            "f_source": [0,1],
            "f_target": [0,1],
            "detector": [0,0]
        }"#,
    )
    .unwrap();
    let out = run(&["shift-bound", inst.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["holds"], true);
    assert_eq!(report["bound"], report["source_error"]);
    assert_eq!(report["distance"], 0.0);
}

#[test]
fn shift_bound_rejects_invalid_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("instance.json");
    fs::write(
        &inst,
        r#"{
            "source_dist": {"support":["a","b"],"probs":[0.4,0.6]},
            "target_dist": {"support":["a","b"],"probs":[0.4,0.6]},
            "f_source": [0],
            "f_target": [0,1],
            "detector": [0,0]
        }"#,
    )
    .unwrap();
    let out = run(&["shift-bound", inst.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn bundled_table_manifest_lists_13_attacks() {
    let raw = fs::read(data_path("manifest_linf_0125.json")).unwrap();
    let manifest = multiarm::ingest::load_manifest(raw.as_slice()).unwrap();
    assert_eq!(manifest.groups.len(), 1);
    assert_eq!(manifest.groups[0].attacks.len(), 13);
    assert_eq!(manifest.groups[0].norm, "Linf");
    assert_eq!(manifest.groups[0].epsilon, Some(0.125));
}
