use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PAIR: &str = r#"{
  "network": {
    "spin": 1,
    "sites": 2,
    "epsilon": 0.1,
    "couplings": [{"pair": [0, 1], "ux": 0.5, "uy": 0.5}],
    "dissipation": {"gain": [100, 1], "damp": [1, 100], "jump": "jpm_jz"}
  },
  "measures": ["smax", "phistar", "negativity"],
  "grid": {"axis1": {"name": "ux", "paths": ["network.couplings[0].ux"], "start": -0.5, "stop": 0.5, "points": 3}}
}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spinsync"));
    cmd.env_remove("SPINSYNC_JOBS");
    cmd
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn steady_writes_state_and_measures() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", PAIR);
    let out = dir.path().join("s.json");
    let o = run(&["steady", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["kernel_dim"], 1);
    assert!(doc["measures"]["smax"].as_f64().unwrap() > 1e-3);
    assert!((doc["measures"]["phistar"].as_f64().unwrap() - FRAC_PI_2).abs() < 1e-3);
    assert_eq!(doc["rho"]["re"].as_array().unwrap().len(), 9);
}

#[test]
fn sweep_csv_layout_and_jobs_independence() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", PAIR);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(
        code(&run(&["sweep", "--config", s(&cfg), "--out", s(&a), "--jobs", "1"])),
        0
    );
    let o = bin()
        .args(["sweep", "--config", s(&cfg), "--out", s(&b)])
        .env("SPINSYNC_JOBS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ux,smax,phistar,negativity,kernel_dim,residual,wall_ms,error");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("-0.5,"));
}

#[test]
fn sweep_json_echoes_request() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", PAIR);
    let out = dir.path().join("r.json");
    assert_eq!(
        code(&run(&[
            "sweep",
            "--config",
            s(&cfg),
            "--out",
            s(&out),
            "--format",
            "json"
        ])),
        0
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["request"]["network"]["sites"], 2);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["ux"], 0.5);
    assert!(rows[0]["error"].is_null());
}

#[test]
fn validation_and_parse_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.csv");
    let bad = write(
        &dir,
        "bad.json",
        &PAIR.replace("\"gain\": [100, 1]", "\"gain\": [-100, 1]"),
    );
    let o = run(&["sweep", "--config", s(&bad), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("network.dissipation.gain[0]"));
    let unknown = write(&dir, "unk.json", &PAIR.replace("\"epsilon\"", "\"epsilonn\""));
    let o = run(&["steady", "--config", s(&unknown), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
    let cfg = write(&dir, "c.json", PAIR);
    assert_eq!(
        code(&run(&["sweep", "--config", s(&cfg), "--out", s(&out), "--jobs", "0"])),
        2
    );
    assert_eq!(code(&run(&["tongue", "--config", s(&cfg), "--out", s(&out)])), 2);
}

#[test]
fn failing_points_exit_3_and_keep_other_columns() {
    let dir = TempDir::new().unwrap();
    // concurrence is only defined for spin-1/2 pairs
    let cfg = write(&dir, "c.json", &PAIR.replace("\"negativity\"", "\"concurrence\""));
    let out = dir.path().join("o.csv");
    assert_eq!(code(&run(&["sweep", "--config", s(&cfg), "--out", s(&out)])), 3);
    let mut rd = csv::Reader::from_path(&out).unwrap();
    for rec in rd.records() {
        let rec = rec.unwrap();
        assert!(!rec[1].is_empty());
        assert!(rec[3].is_empty());
        assert!(rec[7].contains("concurrence"));
    }
}

#[test]
fn solver_failure_exits_4_and_missing_file_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &PAIR.replace("\"gain\": [100, 1]", "\"gain\": [0, 1]"));
    let out = dir.path().join("p.json");
    assert_eq!(
        code(&run(&[
            "perturb",
            "--config",
            s(&cfg),
            "--order",
            "2",
            "--out",
            s(&out)
        ])),
        4
    );
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["steady", "--config", s(&missing), "--out", s(&out)])), 1);
}

#[test]
fn perturb_reports_partial_sums() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", PAIR);
    let out = dir.path().join("p.json");
    let o = run(&["perturb", "--config", s(&cfg), "--order", "2", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let sums = doc["partial_sums"].as_array().unwrap();
    assert_eq!(sums.len(), 3);
    let exact = doc["exact"]["smax"].as_f64().unwrap();
    let first = sums[1]["smax"].as_f64().unwrap();
    assert!(((first - exact) / exact).abs() < 0.05);
    let analytic = doc["analytic_s2_half_pi"].as_f64().unwrap();
    assert!(((analytic - exact) / exact).abs() < 0.05);
    assert!(
        sums[2]["trace_distance_to_exact"].as_f64().unwrap() < sums[0]["trace_distance_to_exact"].as_f64().unwrap()
    );
}

#[test]
fn meanfield_trajectory_and_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "m.json",
        r#"{"meanfield": {"epsilon": 6.0, "ux": 0.8, "uy": -0.8, "gain": 1.0, "damp": 10.0, "t_max": 60.0, "dt": 0.01}}"#,
    );
    let out = dir.path().join("t.csv");
    let o = run(&["meanfield", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["kind"], "FIXED_POINT");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,re_jplus,im_jplus,jz\n"));
    assert!(text.lines().count() > 100);
}

#[test]
fn map_couplings_prints_both_unit_systems() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "d.json",
        r#"{"dressing": {"omega_plus": 2.0, "omega_minus": 2.0, "delta_plus": 3.0, "delta_minus": -3.0,
            "channels": [{"c_pp": 0.4, "c_mm": 0.4, "c_pm": 0.4, "c_mp": 0.4, "delta2": 5.0}], "gamma_ref": 2.0}}"#,
    );
    let o = run(&["map-couplings", "--config", s(&cfg)]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["raw"]["u_pm"], 0.0);
    let raw = doc["raw"]["u_pp"].as_f64().unwrap();
    assert_eq!(doc["dimensionless"]["u_pp"].as_f64().unwrap(), raw / 2.0);
    let zero = write(
        &dir,
        "z.json",
        &std::fs::read_to_string(&cfg)
            .unwrap()
            .replace("\"delta2\": 5.0", "\"delta2\": 0.0"),
    );
    assert_eq!(code(&run(&["map-couplings", "--config", s(&zero)])), 2);
}
