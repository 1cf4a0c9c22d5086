use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vdp(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vdp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("VDP_RTOL")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_shift_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = vdp(&["custom", "--P", "0", "--mu", "1", "--beta", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let b = json(&dir.path().join("bundle.json"));
    let env = vdp_core::expr::ParamEnv::new().with("mu", 1.0).with("beta", 2.0).with("alpha", 0.0);
    let at = |k: &str| vdp_core::expr::parse(b[k].as_str().unwrap()).unwrap().eval(0.3, &env).unwrap();
    assert_eq!((at("g"), at("h"), at("v"), at("f")), (-1.0, 2.0, 2.0, 0.0));
    for f in ["phi.csv", "psi.csv", "ledger.json", "report.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn json_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let out = vdp(&["case1", "--format", "json", "--n", "21"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let psi = json(&dir.path().join("psi.json"));
    assert_eq!(psi["x"].as_array().unwrap().len(), 21);
    assert_eq!(psi["value"].as_array().unwrap().len(), 21);
    assert!(!dir.path().join("psi.csv").exists());
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vdp(&["bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(vdp(&["case1", "--n", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(vdp(&["lienard", "--P", "x"], dir.path()).status.code(), Some(1));
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vdp(&["custom", "--P", "x +"], dir.path()).status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    assert_eq!(vdp(&["verify", "--bundle", missing.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn stored_bundle_verifies() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vdp(&["case3"], dir.path()).status.code(), Some(0));
    let bundle = dir.path().join("bundle.json");
    let check = tempfile::tempdir().unwrap();
    let out = vdp(&["verify", "--bundle", bundle.to_str().unwrap()], check.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&check.path().join("report.json"))["passes"], Value::Bool(true));
}

#[test]
fn rtol_from_environment_yields_to_flag() {
    let dir = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_vdp"))
            .args(["custom", "--P", "x/4", "--n", "6", "--out"])
            .arg(dir.path())
            .args(extra)
            .env("VDP_RTOL", "1e-3")
            .output()
            .unwrap();
        (out.status.code(), fs::read_to_string(dir.path().join("psi.csv")).unwrap())
    };
    let (_, loose) = run(&[]);
    let (code, tight) = run(&["--rtol", "1e-9"]);
    assert_eq!(code, Some(0));
    assert_ne!(loose, tight);
    let clean = tempfile::tempdir().unwrap();
    vdp(&["custom", "--P", "x/4", "--n", "6"], clean.path());
    assert_eq!(fs::read_to_string(clean.path().join("psi.csv")).unwrap(), tight);
}
