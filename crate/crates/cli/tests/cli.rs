use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn entlearn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entlearn"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn entlearn")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = entlearn(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_1() {
    let tmp = TempDir::new().unwrap();
    let out = entlearn(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn help_exits_0() {
    let tmp = TempDir::new().unwrap();
    let out = entlearn(tmp.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("gen-static"));
}

#[test]
fn gradcheck_dynamic_seed_7() {
    let tmp = TempDir::new().unwrap();
    let line = ok(tmp.path(), &["gradcheck", "--arch", "dynamic", "--seed", "7"]);
    assert!(line.contains("max relative error"));
}

#[test]
fn gradcheck_from_config() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("c.json"), r#"{"gradcheck": {"arch": "dynamic_lstm", "seed": 2}}"#).unwrap();
    let line = ok(tmp.path(), &["--config", "c.json", "gradcheck"]);
    assert!(line.contains("DynamicLstm seed 2"), "{line}");
}

#[test]
fn malformed_config_exits_1() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("bad.json"), "{ not json").unwrap();
    let out = entlearn(tmp.path(), &["--config", "bad.json", "gradcheck"]);
    assert_eq!(out.status.code(), Some(1));

    std::fs::write(tmp.path().join("typo.json"), r#"{"gradchek": {}}"#).unwrap();
    let out = entlearn(tmp.path(), &["--config", "typo.json", "gradcheck"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_files_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = entlearn(tmp.path(), &["--config", "absent.json", "gradcheck"]);
    assert_eq!(out.status.code(), Some(2));
    let out = entlearn(tmp.path(), &["oracle", "--data", "absent.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_required_flag_exits_1() {
    let tmp = TempDir::new().unwrap();
    let out = entlearn(tmp.path(), &["gen-static", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--out"));
}

#[test]
fn xxz_sweep_has_51_points_and_summary_csv() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["gen-sweep", "--model", "xxz", "--out", "xxz.jsonl"]);
    let data = String::from_utf8(read(tmp.path(), "xxz.jsonl")).unwrap();
    assert_eq!(data.lines().count(), 52);
    let csv = String::from_utf8(read(tmp.path(), "xxz.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "sweep_value,energy,gap,magnetization_z,S2[12],P3[1|2]");
    assert_eq!(lines.count(), 51);
    assert!(tmp.path().join("xxz.config.json").exists());
}

#[test]
fn static_pipeline_round_trip() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-static", "--out", "train.jsonl", "--samples", "120", "--seed", "3"]);
    ok(d, &["gen-static", "--out", "test.jsonl", "--samples", "20", "--seed", "4"]);
    assert!(ok(d, &["oracle", "--data", "test.jsonl"]).contains("20 samples"));
    ok(
        d,
        &["train", "--data", "train.jsonl", "--out", "model.json", "--arch", "static", "--hidden", "16,8", "--epochs", "5"],
    );
    let log = String::from_utf8(read(d, "model.log.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "epoch,train_loss,val_loss");
    assert_eq!(log.lines().count(), 6);
    ok(d, &["predict", "--model", "model.json", "--data", "test.jsonl", "--out", "pred.jsonl"]);
    assert_eq!(String::from_utf8(read(d, "pred.jsonl")).unwrap().lines().count(), 21);
    let summary = ok(d, &["evaluate", "--predictions", "pred.jsonl", "--reference", "test.jsonl", "--out-dir", "eval"]);
    assert!(summary.contains("S2[12]"), "{summary}");
    for f in ["report.json", "residuals.csv", "scatter_S2_12.csv", "scatter_P3_1-2.csv", "evaluate.config.json"] {
        assert!(d.join("eval").join(f).exists(), "{f}");
    }
    let with_oracle = ok(d, &["evaluate", "--predictions", "pred.jsonl", "--oracle", "--out-dir", "eval2"]);
    assert_eq!(with_oracle, summary);
    assert_eq!(read(d, "eval/report.json"), read(d, "eval2/report.json"));
}

#[test]
fn dynamic_checkpoint_rejects_static_data() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    ok(d, &["gen-static", "--out", "s.jsonl", "--samples", "10"]);
    ok(d, &["gen-dynamic", "--out", "dyn.jsonl", "--samples", "4", "--steps", "4", "--k-out", "6"]);
    let out = entlearn(d, &["train", "--data", "s.jsonl", "--out", "m.json", "--arch", "dynamic"]);
    assert_eq!(out.status.code(), Some(1));
    ok(
        d,
        &[
            "train", "--data", "dyn.jsonl", "--out", "m.json", "--arch", "dynamic", "--lstm-hidden", "4", "--hidden",
            "4", "--epochs", "2",
        ],
    );
    let out = entlearn(d, &["predict", "--model", "m.json", "--data", "s.jsonl", "--out", "p.jsonl"]);
    assert_eq!(out.status.code(), Some(1));
    ok(d, &["predict", "--model", "m.json", "--data", "dyn.jsonl", "--out", "p.jsonl"]);
    ok(d, &["evaluate", "--predictions", "p.jsonl", "--reference", "dyn.jsonl", "--out-dir", "ev"]);
    assert!(d.join("ev/dynamics_S2_12.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let train =
        ["train", "--data", "g.jsonl", "--out", "m.json", "--arch", "static", "--hidden", "8", "--epochs", "3", "--seed", "5"];
    ok(d, &["gen-static", "--out", "g.jsonl", "--samples", "40", "--seed", "9"]);
    ok(d, &train);
    let first = (read(d, "g.jsonl"), read(d, "m.json"), read(d, "m.log.csv"));
    ok(d, &["gen-static", "--out", "g.jsonl", "--samples", "40", "--seed", "9"]);
    ok(d, &train);
    assert_eq!(first, (read(d, "g.jsonl"), read(d, "m.json"), read(d, "m.log.csv")));
}

#[test]
fn flags_override_config() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("p.json"),
        r#"{"gen_static": {"out": "cfg.jsonl", "n_samples": 7, "seed": 1, "metric_specs": [{"kind": "renyi", "order": 2, "region_a": [1]}]}}"#,
    )
    .unwrap();
    ok(d, &["--config", "p.json", "gen-static", "--samples", "3"]);
    let data = String::from_utf8(read(d, "cfg.jsonl")).unwrap();
    assert_eq!(data.lines().count(), 4);
    let resolved: serde_json::Value = serde_json::from_slice(&read(d, "cfg.config.json")).unwrap();
    assert_eq!(resolved["gen_static"]["n_samples"], 3);
    assert_eq!(resolved["gen_static"]["seed"], 1);
}
