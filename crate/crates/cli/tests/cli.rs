// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_trion-dynamics"));
    c.env("TRION_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect()).collect();
    (header, rows)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn rabi_column_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rabi");
    let o = run(&["rabi", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv(&out.join("values.csv"));
    assert_eq!(header, "area_pi,signal");
    assert_eq!(rows.len(), 81);
    assert!(rows.iter().all(|r| r[1].is_finite() && (0.0..=1.0).contains(&r[1])));
    let m = manifest(&out);
    assert_eq!(m["partial"], false);
    assert_eq!(m["experiment"], "rabi");
    assert_eq!(m["phonon_kappa_ns"], 0.0036);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(m["solver_stats"]["accepted"].as_u64().unwrap() > 0);
    assert_eq!(m["config"]["system"]["delta_e_gs"], 104.2);
}

#[test]
fn ramsey_column_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ramsey");
    let o = run(&["ramsey", "--out", &out_arg(&out), "--detuning", "-14.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv(&out.join("values.csv"));
    assert_eq!(header, "fine_delay_fs,signal");
    assert_eq!(rows.len(), 111);
    assert_eq!(manifest(&out)["config"]["sequence"]["detuning"], -14.5);
}

#[test]
fn map_column_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("map");
    let o = run(&["map", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv(&out.join("values.csv"));
    assert_eq!(header, "area_pi,fine_delay_fs,signal");
    assert_eq!(rows.len(), 3721);
    let m = manifest(&out);
    assert_eq!(m["axes"][0]["length"], 61);
    assert_eq!(m["axes"][1]["name"], "fine_delay_fs");
    let range = &m["signal_range"];
    assert!(range["max"].as_f64().unwrap() > range["min"].as_f64().unwrap());
}

#[test]
fn coherence_writes_fits() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("coh");
    let o = run(&["coherence", "--out", &out_arg(&out), "--set", "grids.coarse_delays.count=6"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv(&out.join("values.csv"));
    assert_eq!(header, "coarse_delay_ps,fine_delay_fs,signal");
    assert_eq!(rows.len(), 6 * 111);
    let (header, amps) = csv(&out.join("amplitudes.csv"));
    assert_eq!(header, "coarse_delay_ps,amplitude");
    assert_eq!(amps.len(), 6);
    let fits: Value = serde_json::from_str(&fs::read_to_string(out.join("fits.json")).unwrap()).unwrap();
    assert_eq!(fits["fringes"].as_array().unwrap().len(), 6);
    for key in ["with_baseline", "without_baseline"] {
        let params = fits["decay"][key]["parameters"].as_array().unwrap();
        let tau = params.iter().find(|p| p["name"] == "tau").unwrap()["value"].as_f64().unwrap();
        assert!(tau > 0.0);
    }
}

#[test]
fn zeeman_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("z");
    let o = run(&["zeeman", "--set", "b_max=5", "--out", &out_arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv(&out.join("values.csv"));
    assert_eq!(header, "b_t,outer_low_uev,inner_low_uev,inner_high_uev,outer_high_uev");
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[50][0], 5.0);
    assert!(rows.iter().all(|r| r[1] <= r[2] && r[2] <= r[3] && r[3] <= r[4]));
}

#[test]
fn manifest_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let o = run(&["ramsey", "--out", &out_arg(&a), "--set", "grids.fine_delays.count=21", "--detuning", "9.55"]);
    assert!(o.status.success());
    let o = bin()
        .env("TRION_THREADS", "1")
        .args(["ramsey", "--config"])
        .arg(a.join("manifest.json"))
        .args(["--out", &out_arg(&b)])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(a.join("values.csv")).unwrap(), fs::read(b.join("values.csv")).unwrap());
}

#[test]
fn config_file_is_strict() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"system": {"gamma_spnt": 1}}"#).unwrap();
    let o = bin().arg("rabi").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma_spnt"), "{err}");

    let out = tmp.path().join("ok");
    fs::write(&cfg, r#"{"sequence": {"detuning": 14.5}, "grids": {"areas": [0, 1, 2]}}"#).unwrap();
    let o = bin().arg("rabi").arg("--config").arg(&cfg).args(["--out", &out_arg(&out)]).output().unwrap();
    assert!(o.status.success());
    assert_eq!(csv(&out.join("values.csv")).1.len(), 3);
    assert_eq!(manifest(&out)["config"]["sequence"]["detuning"], 14.5);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["bogus"],
        vec![],
        vec!["rabi", "--set", "nonsense=1"],
        vec!["rabi", "--set", "missing_equals"],
        vec!["rabi", "--set", "gamma_spont=-1"],
        vec!["rabi", "--detuning", "fast"],
        vec!["rabi", "--config", "/nonexistent/config.json"],
        vec!["fit", "--kind", "nope", "--data", "x.csv"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn fit_round_trip_on_simulated_fringes() {
    let tmp = tempfile::tempdir().unwrap();
    let r = tmp.path().join("r");
    assert!(run(&["ramsey", "--out", &out_arg(&r)]).status.success());
    let f = tmp.path().join("f");
    let o = bin()
        .args(["fit", "--kind", "sinusoid", "--data"])
        .arg(r.join("values.csv"))
        .args(["--out", &out_arg(&f)])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let fits: Value = serde_json::from_str(&fs::read_to_string(f.join("fits.json")).unwrap()).unwrap();
    let freq = fits["result"]["parameters"][1]["value"].as_f64().unwrap();
    let expected = manifest(&r)["laser_frequency_ghz"].as_f64().unwrap() * 1e-6;
    assert!((freq / expected - 1.0).abs() < 1e-3);

    let o = bin().args(["fit", "--kind", "calibration", "--data"]).arg(r.join("values.csv")).output().unwrap();
    assert_eq!(o.status.code(), Some(1), "calibration without a model is a runtime error");
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("PASS invariants") && text.contains("PASS oracle"), "{text}");
}
