use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn pbda(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbda"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run pbda")
}

fn json_ok(args: &[&str], dir: &Path) -> Value {
    let out = pbda(args, dir);
    assert_eq!(
        out.status.code(),
        Some(0),
        "pbda {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).expect("json output");
    assert_eq!(v["spec_version"], "1.0");
    assert!(v["config"].is_object());
    v
}

fn moons(dir: &Path, n: &str) {
    json_ok(
        &["gen-moons", "--n-per-class", n, "--test-per-class", "40", "--angle", "20", "--seed", "7", "--out-dir", "d"],
        dir,
    );
}

#[test]
fn gen_moons_writes_files_deterministically() {
    let dir = TempDir::new().unwrap();
    let v = json_ok(
        &["gen-moons", "--n-per-class", "10", "--test-per-class", "5", "--seed", "3", "--out-dir", "a"],
        dir.path(),
    );
    assert_eq!(v["files"]["source"]["count"], 20);
    assert_eq!(v["files"]["target"]["count"], 20);
    assert_eq!(v["files"]["test"]["count"], 10);
    assert_eq!(v["files"]["test"]["seed"], 5);
    json_ok(
        &["gen-moons", "--n-per-class", "10", "--test-per-class", "5", "--seed", "3", "--out-dir", "b"],
        dir.path(),
    );
    for f in ["source.svm", "target.svm", "test.svm"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

fn predictions(dir: &Path, algo: &str, extra: &[&str], name: &str) -> Vec<u8> {
    let model = format!("{name}.json");
    let mut args = vec!["train", "--algo", algo, "--source", "d/source.svm", "--target", "d/target.svm", "--C", "3"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", &model]);
    json_ok(&args, dir);
    let pred = format!("{name}.txt");
    json_ok(&["predict", "--model", &model, "--data", "d/test.svm", "--out", &pred], dir);
    std::fs::read(dir.join(pred)).unwrap()
}

#[test]
fn pbda_with_zero_a_predicts_like_pbgd3() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "20");
    for (i, extra) in [vec![], vec!["--kernel", "rbf", "--gamma", "2"]].into_iter().enumerate() {
        let base = predictions(dir.path(), "pbgd3", &extra, &format!("g{i}"));
        let mut with_a = extra.clone();
        with_a.extend_from_slice(&["--A", "0"]);
        let da = predictions(dir.path(), "pbda", &with_a, &format!("p{i}"));
        assert_eq!(base, da);
        assert_eq!(String::from_utf8(base).unwrap().lines().count(), 80);
    }
}

#[test]
fn train_reports_summary_fields() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "15");
    let v = json_ok(
        &["train", "--algo", "pbda", "--source", "d/source.svm", "--target", "d/target.svm", "--A", "1", "--C", "2"],
        dir.path(),
    );
    for key in ["objective", "iterations", "empirical_risk", "empirical_dis", "kl_term"] {
        assert!(v[key].is_number(), "{key} missing");
    }
    assert!(v["warm_start"].is_object());
    let risk = v["empirical_risk"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&risk));
}

#[test]
fn multisource_training_runs() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "15");
    json_ok(
        &["gen-moons", "--n-per-class", "15", "--angle", "10", "--seed", "9", "--out-dir", "e"],
        dir.path(),
    );
    let v = json_ok(
        &[
            "train", "--algo", "pbda-multi", "--source", "d/source.svm", "--source", "e/target.svm", "--target",
            "d/target.svm", "--source-weights", "0.3,0.7", "--A", "1",
        ],
        dir.path(),
    );
    assert_eq!(v["per_source_dis"].as_array().unwrap().len(), 2);
}

#[test]
fn catoni_bound_matches_independent_value() {
    let dir = TempDir::new().unwrap();
    let v = json_ok(
        &[
            "bound", "--bound", "catoni", "--empirical-risk", "0.1", "--kl-term", "10", "--m", "1000", "--delta",
            "0.05", "--c", "1",
        ],
        dir.path(),
    );
    let value = v["report"]["value"].as_f64().unwrap();
    // 1/(1 − e^{−1}) · (1 − exp(−(0.1 + (10 + ln(1/0.05))/1000)))
    let expected = 0.178_756_616_432_405_01;
    assert!((value - expected).abs() <= 1e-15, "{value}");
}

#[test]
fn bound_from_report_config_and_model() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "15");
    json_ok(
        &["train", "--algo", "pbda", "--source", "d/source.svm", "--target", "d/target.svm", "--out", "m.json"],
        dir.path(),
    );
    std::fs::write(
        dir.path().join("b.json"),
        r#"{"bound": "da_catoni", "model": "m.json", "source": "d/source.svm", "target": "d/target.svm",
            "delta": 0.05, "c": 1.0, "alpha": 1.0}"#,
    )
    .unwrap();
    let v = json_ok(&["bound", "--report-config", "b.json"], dir.path());
    assert_eq!(v["inputs"]["m"], 30.0);
    assert!(v["inputs"]["kl_term"].as_f64().unwrap() > 0.0);
    assert!(v["report"]["valid"].as_bool().unwrap());
    // An explicit ingredient replaces the measured one.
    let w = json_ok(&["bound", "--report-config", "b.json", "--kl-term", "0"], dir.path());
    assert_eq!(w["inputs"]["kl_term"], 0.0);
}

#[test]
fn flags_override_config_values() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "10");
    std::fs::write(
        dir.path().join("t.json"),
        r#"{"algo": "pbgd3", "source": "d/source.svm", "C": 5.0, "max_iter": 50}"#,
    )
    .unwrap();
    let v = json_ok(&["train", "--config", "t.json", "--C", "2"], dir.path());
    assert_eq!(v["config"]["C"], 2.0);
    assert_eq!(v["config"]["max_iter"], 50);
}

#[test]
fn reverse_cv_is_seeded() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "15");
    let args = [
        "reverse-cv", "--algo", "pbda", "--source", "d/source.svm", "--target", "d/target.svm", "--k", "3", "--seed",
        "4",
    ];
    let a = json_ok(&args, dir.path());
    let b = json_ok(&args, dir.path());
    let r = a["risk"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&r));
    assert_eq!(a["risk"], b["risk"]);
    assert_eq!(a["config"]["seed"], 4);
}

#[test]
fn grid_search_writes_table() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "12");
    std::fs::write(
        dir.path().join("g.json"),
        r#"{"A_values": [0.1, 1.0], "C_values": [1.0, 10.0], "kernel_values": [{"kind": "rbf", "gamma": 2.0}]}"#,
    )
    .unwrap();
    let v = json_ok(
        &[
            "grid-search", "--algo", "pbda", "--source", "d/source.svm", "--target", "d/target.svm", "--grid-config",
            "g.json", "--criterion", "mean", "--k", "3", "--table", "scores.tsv",
        ],
        dir.path(),
    );
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert_eq!(v["criterion"], "mean");
    let table = std::fs::read_to_string(dir.path().join("scores.tsv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "A\tC\tkernel\tgamma\tcv\trcv\tcriterion\trank");
    assert_eq!(lines.count(), 4);
    assert!(table.lines().skip(1).any(|l| l.ends_with("\t1")));
}

#[test]
fn verify_finite_vote_passes() {
    let dir = TempDir::new().unwrap();
    let v = json_ok(&["verify", "--suite", "finite-vote", "--trials", "200"], dir.path());
    assert_eq!(v["passed"], true);
    let out = pbda(&["verify", "--suite", "identities", "--trials", "50"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn moons_benchmark_tiny_config() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("bench.json"),
        r#"{"angles": [10.0], "repeats": 1, "n_per_class": 10, "test_per_class": 20,
            "A_values": [1.0], "C_values": [1.0, 10.0], "folds": 2}"#,
    )
    .unwrap();
    let v = json_ok(&["moons-benchmark", "--config", "bench.json", "--table", "t.tsv"], dir.path());
    assert_eq!(v["summary"].as_array().unwrap().len(), 1);
    assert_eq!(v["config"]["repeats"], 1);
    let table = std::fs::read_to_string(dir.path().join("t.tsv")).unwrap();
    assert!(table.starts_with("angle\tpbda_mean"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    moons(dir.path(), "5");
    let code = |args: &[&str]| pbda(args, dir.path()).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["no-such-command"]), Some(1));
    assert_eq!(code(&["train", "--algo", "bogus"]), Some(1));
    assert_eq!(code(&["train", "--algo", "pbgd3"]), Some(1));
    assert_eq!(code(&["verify", "--suite", "nope"]), Some(1));
    assert_eq!(code(&["bound", "--bound", "catoni", "--m", "10"]), Some(1));
    std::fs::write(dir.path().join("x.json"), r#"{"algo": "pbgd3", "source": "d/source.svm", "zzz": 1}"#).unwrap();
    assert_eq!(code(&["train", "--config", "x.json"]), Some(1));
    // The objective overflows at the starting point.
    assert_eq!(
        code(&["train", "--algo", "pbgd3", "--source", "d/source.svm", "--C", "1e308"]),
        Some(2)
    );
}
