use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_riq");

fn riq(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("RIQ_SEED").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// h₀ = ε diag(−1, 1), one site level at energy 1.5.
fn qubit_json(eps: f64, coupling: &str, beta: &str) -> String {
    format!(
        r#"{{"d":1,"n":1,"h0":[[[{m},0],[0,0]],[[0,0],[{eps},0]]],"delta":[1.5],"V":[{coupling}],"beta":{beta}}}"#,
        m = -eps
    )
}

const GENERIC_V: &str = "[[[0.2,0.1],[0.5,0]],[[0.3,-0.2],[-0.1,0]]]";
const ZERO_V: &str = "[[[0,0],[0,0]],[[0,0],[0,0]]]";

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_uncoupled_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", &qubit_json(0.7, ZERO_V, "1.0"));
    let out = dir.path().join("out");
    let o = riq(&["validate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out.join("validate.json"));
    assert_eq!(v["pass"], Value::Bool(true));
    for c in v["checks"].as_array().unwrap() {
        if c["comparison"] == "at_most" && c["note"].is_null() {
            assert!(c["value"].as_f64().unwrap() <= 1e-12, "{c}");
        }
    }
}

#[test]
fn non_hermitian_h0_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = qubit_json(0.7, GENERIC_V, "1.0").replace("[[[-0.7,0],[0,0]]", "[[[-0.7,0],[1,0]]");
    let cfg = write(dir.path(), "m.json", &text);
    let o = riq(&["validate", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("h0"));
}

#[test]
fn generators_for_qubit_and_zero_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", &qubit_json(0.7, GENERIC_V, "\"inf\""));
    let out = dir.path().join("gen");
    let o = riq(&["generators", "--config", &cfg, "--out", out.to_str().unwrap(), "--tau", "0.9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let gwb = json(&out.join("gamma_w_beta.json"));
    assert_eq!(gwb["metadata"]["qubit_cross_check"]["pass"], Value::Bool(true));
    assert_eq!(gwb["metadata"]["beta"], "inf");
    assert_eq!(gwb["metadata"]["tau"], 0.9);
    let jumps = json(&out.join("lindblad_jumps.json"));
    // at zero temperature the absorption jumps vanish
    let first = &jumps["jumps"][0];
    assert!(first.as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()).all(|z| z[0] == 0.0 && z[1] == 0.0));
}

#[test]
fn generators_require_out() {
    assert_eq!(code(&riq(&["generators", "--dims", "1,1"])), 2);
}

#[test]
fn converge_uncoupled_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", &qubit_json(0.7, ZERO_V, "1.0"));
    let out = dir.path().join("cv");
    let o = riq(&[
        "converge",
        "--config",
        &cfg,
        "--regime",
        "critical",
        "--k-list",
        "8,16,32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("converge_critical.json"));
    assert_eq!(s["status"], "exact");
    assert_eq!(s["pass"], Value::Bool(true));
    let csv = std::fs::read_to_string(out.join("converge_critical.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("regime,t,tau,lambda,k,error_schrodinger,error_heisenberg"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn converge_rejects_bad_schedules_and_regimes() {
    assert_eq!(code(&riq(&["converge", "--regime", "weak", "--k-list", "0,4"])), 2);
    assert_eq!(code(&riq(&["converge", "--regime", "weak", "--k-list", "16"])), 2);
    assert_eq!(code(&riq(&["converge", "--regime", "sideways"])), 2);
    assert_eq!(code(&riq(&["converge", "--regime", "critical", "--t", "-1"])), 2);
}

#[test]
fn qubit_phase_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let half = std::f64::consts::FRAC_PI_2;
    let cfg = write(dir.path(), "m.json", &qubit_json(half, GENERIC_V, "0.8"));
    let o = riq(&["qubit", "--config", &cfg, "--tau", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = riq(&["qubit", "--config", &cfg, "--tau", "2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("pi"));
}

#[test]
fn qubit_needs_two_levels() {
    assert_eq!(code(&riq(&["qubit", "--dims", "2,1"])), 2);
    assert_eq!(code(&riq(&["qubit", "--dims", "1,1", "--seed", "5"])), 0);
}

#[test]
fn env_seed_overrides_flag() {
    let run = |env: Option<&str>, seed: &str| {
        let mut c = Command::new(BIN);
        c.args(["converge", "--regime", "critical", "--k-list", "8,16", "--dims", "1,1", "--seed", seed]);
        match env {
            Some(e) => c.env("RIQ_SEED", e),
            None => c.env_remove("RIQ_SEED"),
        };
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("3"), "9"), run(None, "3"));
    assert_ne!(run(None, "9"), run(None, "3"));
}

#[test]
fn wrapped_config_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(r#"{{"model":{},"t":0.5,"k_list":[4,8]}}"#, qubit_json(0.7, GENERIC_V, "1.0"));
    let cfg = write(dir.path(), "run.json", &text);
    let o = riq(&["converge", "--config", &cfg, "--regime", "continuous"]);
    let csv = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<_> = csv.lines().filter(|l| l.starts_with("continuous,")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("continuous,0.5,0.125,1,4,"), "{}", rows[0]);
}
