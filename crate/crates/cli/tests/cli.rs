use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snn-twin"))
        .args(args)
        .env_remove("SNN_TWIN_PROFILE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TYPICAL_WITHOUT_3X8: &str = r#"{
  "name": "sparse-table",
  "e_acc": "0.05448", "e_cmp": "0.05448", "e_sub": "0.05448",
  "e_mac": [{"activation_bits": 3, "weight_bits": 4, "pj": "0.65"}],
  "e_weight": [{"weight_bits": 8, "pj": "0.18"}],
  "e_move_dense": "0.25", "e_move_sparse": "3"
}"#;

#[test]
fn energy_json_has_totals_and_ratio() {
    let o = run(&["energy", "--model", "typical", "--scenario", "best", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["hw"], "typical-neuromorphic");
    assert_eq!(v["workload"]["gamma"], "0.6");
    let snn = v["e_snn_total_pj"].as_f64().unwrap();
    let qnn = v["e_qnn_total_pj"].as_f64().unwrap();
    assert!((v["ratio"].as_f64().unwrap() - snn / qnn).abs() < 1e-12);
    assert_eq!(v["snn"]["data_pj"].as_f64().unwrap(), 5210.112);
    assert_eq!(v["qnn"]["data_pj"].as_f64().unwrap(), 3809.28);
    assert_eq!(v["data_advantage"].as_array().unwrap().len(), 6);
}

#[test]
fn missing_mac_entry_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sparse-table.json");
    std::fs::write(&path, TYPICAL_WITHOUT_3X8).unwrap();
    let o = run(&[
        "energy",
        "--hw",
        path_str(&path),
        "--model",
        "typical",
        "--gamma",
        "0.6",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("(activation_bits=3, weight_bits=8)"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn aggregated_mode_is_routed() {
    let o = run(&[
        "energy",
        "--T",
        "8",
        "--s-r",
        "0.1",
        "--gamma",
        "0.8",
        "--snn-mode",
        "aggregated",
        "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["snn"]["mode"].as_str().unwrap().starts_with("aggregated-"));
}

#[test]
fn workload_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.json");
    std::fs::write(
        &cfg,
        r#"{"n_src": 4096, "T": 4, "s_r": "0.1", "gamma": "0.6", "weight_bits": 8}"#,
    )
    .unwrap();
    let a = run(&["energy", "--config", path_str(&cfg), "--json"]);
    let b = run(&["energy", "--model", "typical", "--gamma", "0.6", "--json"]);
    let (a, b): (Value, Value) = (
        serde_json::from_str(&stdout(&a)).unwrap(),
        serde_json::from_str(&stdout(&b)).unwrap(),
    );
    assert_eq!(a["e_snn_total_pj"], b["e_snn_total_pj"]);
    assert_eq!(a["ratio_exact"], b["ratio_exact"]);

    std::fs::write(&cfg, r#"{"n_src": 4096, "T": 4, "s_r": "0.1", "gamma": "0.6"}"#).unwrap();
    assert_eq!(run(&["energy", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn breakeven_table_has_one_row_per_window() {
    let o = run(&["breakeven", "--T", "1..8", "--gamma", "0.8", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r["outcome"] == "root"));
    assert!(v["annotations"]["max_s_star_t5_to_t10"].is_number());

    let text = stdout(&run(&["breakeven", "--T", "4", "--gamma", "1"]));
    assert!(text.contains("none") && text.contains("no-feasible-rate"), "{text}");
}

#[test]
fn landscape_writes_27_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["landscape", "--out", path_str(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 28);
    assert_eq!(text.lines().filter(|l| l.ends_with(",false")).count(), 3);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let json = dir.path().join("c.json");
    assert!(run(&["landscape", "--out", path_str(&json)]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 27);
}

#[test]
fn sweep_writes_companion_breakevens() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let o = run(&[
        "sweep",
        "--T",
        "1..8",
        "--weight-bits",
        "4,8",
        "--n-src",
        "64,4096",
        "--s-r",
        "0:0.1:1",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let grid = std::fs::read_to_string(&out).unwrap();
    assert_eq!(grid.lines().count(), 1 + 8 * 2 * 2 * 11);
    let be = std::fs::read_to_string(dir.path().join("grid_breakeven.csv")).unwrap();
    assert_eq!(be.lines().count(), 1 + 32);
}

#[test]
fn output_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    assert_eq!(
        run(&["landscape", "--out", path_str(&csv), "--format", "json"])
            .status
            .code(),
        Some(2)
    );
    let bad = dir.path().join("missing").join("x.csv");
    assert_eq!(run(&["landscape", "--out", path_str(&bad)]).status.code(), Some(3));
    assert_eq!(
        run(&["energy", "--hw", "nope", "--model", "typical", "--gamma", "0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["energy", "--model", "typical"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_is_reproducible() {
    let a = run(&[
        "verify",
        "--trials",
        "500",
        "--seed",
        "9",
        "--rate-trials",
        "50",
        "--json",
    ]);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = run(&[
        "verify",
        "--trials",
        "500",
        "--seed",
        "9",
        "--rate-trials",
        "50",
        "--json",
    ]);
    assert_eq!(stdout(&a), stdout(&b));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["spike_count"]["oracle_mismatches"], 0);
    assert_eq!(v["manifest"]["seed"], 9);
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_outside_premise_only_reports() {
    let o = run(&[
        "verify",
        "--trials",
        "300",
        "--max-weight",
        "2",
        "--rate-trials",
        "0",
        "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["spike_count"]["premise_violated"].as_u64().unwrap() > 0);
    assert!(v["spike_count"]["mismatches_outside_premise"].as_u64().unwrap() > 0);
}

#[test]
fn profile_dir_overrides_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let shown = stdout(&run(&["presets", "--show", "typical-neuromorphic"]));
    let edited = shown.replace("\"e_move_sparse\": \"3\"", "\"e_move_sparse\": \"6\"");
    assert_ne!(shown, edited);
    std::fs::write(dir.path().join("typical-neuromorphic.json"), edited).unwrap();

    let base = run(&[
        "energy",
        "--model",
        "typical",
        "--gamma",
        "0.6",
        "--snn-mode",
        "sparse",
        "--json",
    ]);
    let over = Command::new(env!("CARGO_BIN_EXE_snn-twin"))
        .args([
            "energy",
            "--model",
            "typical",
            "--gamma",
            "0.6",
            "--snn-mode",
            "sparse",
            "--json",
        ])
        .env("SNN_TWIN_PROFILE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(over.status.success(), "{}", stderr(&over));
    let (base, over): (Value, Value) = (
        serde_json::from_str(&stdout(&base)).unwrap(),
        serde_json::from_str(&stdout(&over)).unwrap(),
    );
    assert!(over["snn"]["data_pj"].as_f64().unwrap() > base["snn"]["data_pj"].as_f64().unwrap());
}

#[test]
fn presets_lists_everything() {
    let text = stdout(&run(&["presets"]));
    for name in [
        "theoretical-min",
        "typical-neuromorphic",
        "worst-sparse",
        "efficient",
        "typical",
        "high-performance",
    ] {
        assert!(text.contains(name), "{name}");
    }
}
