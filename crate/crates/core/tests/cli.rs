use std::path::PathBuf;
use std::process::Command;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gdm-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = gdm::cli::run(std::iter::once("gdm").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn check_passes_on_defaults() {
    let dir = scratch("check");
    let (code, out, _) = run(&["--out-dir", dir.to_str().unwrap(), "check", "--samples", "20000"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("suite,case,pass,detail"));
    assert!(!out.contains(",false,"));
}

#[test]
fn study_with_one_level_is_a_config_error() {
    let dir = scratch("one-level");
    let cfg = configs().join("study_one_level.toml");
    let (code, _, err) = run(&["--out-dir", dir.to_str().unwrap(), "study", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    let rec: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(rec["error"], "config");
    assert_eq!(rec["exit_code"], 2);
}

#[test]
fn missing_config_and_bad_flags_exit_two() {
    assert_eq!(run(&["study", "/nonexistent/study.toml"]).0, 2);
    assert_eq!(run(&["--format", "xml", "check"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn indicators_on_one_dof_mesh() {
    let dir = scratch("ind");
    let cfg = configs().join("indicators_one_dof.toml");
    let (code, out, _) = run(&["--out-dir", dir.to_str().unwrap(), "indicators", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let line = out.lines().find(|l| l.contains(",C_D,")).unwrap();
    let value: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
    assert!((value - 0.353553).abs() < 1e-6);
    assert!(dir.join("indicators.csv").exists());
}

#[test]
fn study_is_reproducible_and_well_formed() {
    let cfg = configs().join("stefan.toml");
    let (a, b) = (scratch("rep-a"), scratch("rep-b"));
    for d in [&a, &b] {
        let (code, _, err) = run(&["--seed", "7", "--out-dir", d.to_str().unwrap(), "study", cfg.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
    }
    let (ca, cb) = (
        std::fs::read(a.join("stefan.csv")).unwrap(),
        std::fs::read(b.join("stefan.csv")).unwrap(),
    );
    assert_eq!(ca, cb);
    let text = String::from_utf8(ca).unwrap();
    assert_eq!(text.lines().next().unwrap(), "experiment,level,h,dt,monitor,value,threshold,pass");
    let mut last = f64::INFINITY;
    for line in text.lines().filter(|l| l.contains(",error_uniform_nu,")) {
        let v: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(v < last);
        last = v;
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("stefan.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["pass"], true);
}

#[test]
fn run_exports_trajectory() {
    let dir = scratch("run");
    let cfg = configs().join("heat_1d.toml");
    let (code, out, _) = run(&["--out-dir", dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let text = std::fs::read_to_string(dir.join("heat_1d_trajectory.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "step,time,dof,x,y,u");
    // 8 steps plus the initial state, 7 interior dofs
    assert_eq!(text.lines().count(), 1 + 9 * 7);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_gdm");
    let dir = scratch("bin");
    let status = Command::new(bin)
        .args(["--out-dir", dir.to_str().unwrap(), "study"])
        .arg(configs().join("study_one_level.toml"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
