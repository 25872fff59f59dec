use std::fs;
use std::process::Command;

use fqam_sim::harness::{run_campaign, DropContext, Mode, SimConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fqam-sim"))
}

#[test]
fn simulate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", "--scenario", "frequency", "--mode", "all-qam", "--drops", "1", "--seed", "4", "--workers", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "frequency");
    assert_eq!(summary["mode"], "all_qam");
    assert_eq!(summary["seed"], 4);
    assert_eq!(summary["metrics"]["n_samples"], 42);
    let m = &summary["metrics"];
    let (p5, mean, p95) = (m["p5"]["value"].as_f64().unwrap(), m["mean"]["value"].as_f64().unwrap(), m["p95"]["value"].as_f64().unwrap());
    assert!(p5 <= mean && mean <= p95);
    let samples = fs::read_to_string(dir.path().join("samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 43);
    assert!(samples.lines().skip(1).all(|l| l.contains(",qam,")));
}

#[test]
fn config_file_is_applied_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n_cells = 7\nusers_per_cell = 3\n[mc]\nmi_samples = 16\nbootstrap_resamples = 10\n").unwrap();
    let out = bin()
        .args(["compare", "--drops", "2", "--workers", "2", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let samples = fs::read_to_string(dir.path().join("o/hybrid/samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 1 + 2 * 7 * 3);
    let cmp: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/comparison.json")).unwrap()).unwrap();
    assert!(cmp["delta"]["p5"]["relative"].is_f64());

    fs::write(&cfg, "beamz = 3\n").unwrap();
    let out = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("x")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("beamz"));

    fs::write(&cfg, "[thresholds]\nn_th = 0\n").unwrap();
    let out = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("x")).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("thresholds.n_th"));
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["simulate", "--mode", "mixed"],
        vec!["simulate", "--drops", "0"],
        vec!["simulate", "--workers", "0", "--drops", "1"],
        vec!["launch"],
    ] {
        let out = bin().args(&args).arg("--out").arg(dir.path()).output().unwrap();
        assert!(!out.status.success(), "{args:?} succeeded");
    }
}

#[test]
fn more_drops_tighten_intervals() {
    let width = |n: u64, seed: u64| {
        let mut c = SimConfig { n_cells: 7, ..SimConfig::default() };
        c.mc.mi_samples = 32;
        c.mc.bootstrap_resamples = 200;
        c.mc.seed = seed;
        let m = run_campaign(&DropContext::new(c).unwrap(), Mode::AllQam, n, 1).unwrap().metrics;
        m.mean.ci_high - m.mean.ci_low
    };
    let narrow: f64 = (0..3).map(|s| width(80, s)).sum();
    let wide: f64 = (0..3).map(|s| width(20, s)).sum();
    assert!(narrow < wide, "{narrow} vs {wide}");
}

#[test]
fn shipped_config_matches_defaults() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("config/default.toml");
    assert_eq!(fqam_sim::harness::load_config(&path).unwrap(), SimConfig::default());
}
