use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn jtwpa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jtwpa")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = jtwpa(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn reference() -> String {
    data("reference.json").to_string_lossy().into_owned()
}

fn close(v: &Value, expected: f64, rel: f64) {
    let x = v.as_f64().unwrap_or_else(|| panic!("{v} is not a number"));
    assert!(((x - expected) / expected).abs() < rel, "{x} vs {expected}");
}

#[test]
fn squeeze_with_pumps_off_is_vacuum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("off.json");
    std::fs::write(&cfg, r#"{"pumps": {"p_nw": [0.0, 0.0]}}"#).unwrap();
    let v = ok_json(&["--config", cfg.to_str().unwrap(), "squeeze"]);
    let d = &v["data"];
    assert!(d["squeeze_db"].as_f64().unwrap().abs() < 1e-9);
    assert!(d["antisqueeze_db"].as_f64().unwrap().abs() < 1e-9);
    assert!((d["purity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "squeeze");
}

#[test]
fn analyze_golden_dataset() {
    let v = ok_json(&["--config", &reference(), "analyze"]);
    let d = &v["data"];
    assert_eq!(d["mode"], "single_mode");
    close(&d["alpha_quanta_per_mv2"], 0.1291, 5e-4);
    close(&d["big_x_min"]["value"], 0.03831, 5e-4);
    close(&d["big_x_max"]["value"], 18.77, 5e-4);
    close(&d["db_sqz"], -11.16, 5e-4);
    close(&d["db_anti"], 15.74, 5e-4);
    close(&d["eta_bounds"]["db_sqz"]["plus"], 1.513, 5e-3);
    close(&d["eta_bounds"]["db_sqz"]["minus"], 2.337, 5e-3);
    assert_eq!(v["inputs"][0]["path"], "golden_single_mode.csv");
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn sweep_rows_match_grid_and_are_reproducible() {
    let r = reference();
    let a = jtwpa(&["--config", &r, "--format", "csv", "--threads", "1", "sweep"]);
    let b = jtwpa(&["--config", &r, "--format", "csv", "--threads", "4", "sweep"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    // 3 pump-2 powers x 2 signals x 1 loss profile, plus the header.
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(text.lines().skip(1).all(|l| l.ends_with(',')), "no failed points");
}

#[test]
fn json_report_is_deterministic() {
    let r = reference();
    let a = jtwpa(&["--config", &r, "gain"]);
    let b = jtwpa(&["--config", &r, "gain"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["data"]["rows"].as_array().unwrap().len(), 23);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"pumps": {"power_nw": [1.0, 2.0]}}"#).unwrap();
    let out = jtwpa(&["--config", cfg.to_str().unwrap(), "squeeze"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "ConfigError");
    assert!(e["error"]["message"].as_str().unwrap().contains("power_nw"));
}

#[test]
fn csv_is_rejected_for_scalar_reports() {
    let out = jtwpa(&["--format", "csv", "squeeze"]);
    assert_eq!(out.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "UnsupportedError");
}

#[test]
fn stopband_signal_reports_core_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sb.json");
    std::fs::write(&cfg, r#"{"simulation": {"signal_ghz": 5.2705}}"#).unwrap();
    let out = jtwpa(&["--config", cfg.to_str().unwrap(), "squeeze"]);
    assert_eq!(out.status.code(), Some(4));
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "StopbandError");
}

#[test]
fn synth_binary_round_trip_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tms.f64");
    let out = jtwpa(&["--out", path.to_str().unwrap(), "synth", "--kind", "two-mode", "--samples", "4000", "--r", "0.6", "--phi0", "0.3", "--seed", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("tms.f64.json").exists());
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"analysis": {"eta_meas": 1.0, "eta_plus": 0.0, "eta_minus": 0.0}}"#).unwrap();
    let v = ok_json(&["--config", cfg.to_str().unwrap(), "analyze", "--input", path.to_str().unwrap()]);
    let d = &v["data"];
    assert_eq!(d["mode"], "two_mode");
    assert!((d["phi_opt_rad"].as_f64().unwrap() - 0.3).abs() < 2f64.to_radians());
    assert_eq!(v["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn calibrations_recover_synthetic_truth() {
    let r = reference();
    let s = ok_json(&["--config", &r, "calibrate-sntj"]);
    close(&s["data"]["fit"]["t_noise"], 2.46, 0.02);
    close(&s["data"]["system"]["g_sys_db"], 90.0, 0.002);
    let w = ok_json(&["--config", &r, "calibrate-wqed"]);
    close(&w["data"]["fit"]["gamma1"], 4e6, 0.02);
    close(&w["data"]["fit"]["gamma2"], 2.5e6, 0.02);
    close(&w["data"]["input_attenuation_db"], -60.0, 0.01);
    let c = ok_json(&["--config", &r, "cross-cal"]);
    close(&c["data"][0]["t_sys_corrected_k"], 1.233, 3e-3);
}
