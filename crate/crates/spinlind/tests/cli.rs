use std::path::{Path, PathBuf};
use std::process::Command;

use spinlind::config::{Mode, RunConfig};
use spinlind::run::run;
use spinlind::Error;

fn config(name: &str) -> PathBuf { Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name) }

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spinlind-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn load(name: &str) -> RunConfig { RunConfig::parse(&std::fs::read_to_string(config(name)).unwrap()).unwrap() }

fn bin() -> Command { Command::new(env!("CARGO_BIN_EXE_spinlind")) }

#[test]
fn naphthalene_config_gives_25_lines() {
    let out = scratch("naph");
    run(&load("naphthalene.conf"), &out).unwrap();
    let csv = std::fs::read_to_string(out.join("naphthalene_spectrum.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "delta_b_gauss,intensity,weight,config");
    assert_eq!(rows.len(), 26);
    assert!(rows.contains(&"18.36,24,24,3;2"), "{csv}");
    let svg = std::fs::read_to_string(out.join("naphthalene_spectrum.svg")).unwrap();
    assert_eq!(svg.matches("stroke=\"navy\"").count(), 25);
}

#[test]
fn output_is_deterministic() {
    for name in ["biphenyl.conf", "anthracene.conf"] {
        let (a, b) = (scratch("det-a"), scratch("det-b"));
        let cfg = load(name);
        run(&cfg, &a).unwrap();
        run(&cfg, &b).unwrap();
        let file = format!("{}_spectrum.csv", cfg.output.prefix);
        let x = std::fs::read(a.join(&file)).unwrap();
        assert_eq!(x, std::fs::read(b.join(&file)).unwrap());
        assert_eq!(String::from_utf8(x).unwrap().lines().count(), 76);
    }
}

#[test]
fn qubit_config_meets_tolerance() {
    let out = scratch("qubit");
    run(&load("qubit.conf"), &out).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("spin_half_qubit_report.json")).unwrap()).unwrap();
    assert!(report["max_deviation"].as_f64().unwrap() < 1e-6);
    assert_eq!(report["passed"], true);
}

#[test]
fn other_modes_write_artifacts() {
    let out = scratch("modes");
    run(&load("two_spin.conf"), &out).unwrap();
    assert!(out.join("two_spin_trajectory.csv").exists());
    assert!(out.join("two_spin_power.csv").exists());
    run(&load("acp_pair.conf"), &out).unwrap();
    let z: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("acp_pair_zeta.json")).unwrap()).unwrap();
    assert_eq!(z["rows"].as_array().unwrap().len(), 4);
    assert!(z["max_recursion_determinant_gap"].as_f64().unwrap() < 1e-10);

    let mut cfg = load("two_spin.conf");
    cfg.mode = Mode::Verify;
    cfg.validate().unwrap();
    run(&cfg, &out).unwrap();
    let txt = std::fs::read_to_string(out.join("two_spin_verify.txt")).unwrap();
    assert!(txt.lines().all(|l| l.starts_with("PASS")), "{txt}");
}

#[test]
fn mode_requirements_are_validated() {
    let mut cfg = load("naphthalene.conf");
    cfg.mode = Mode::Propagate;
    assert!(matches!(cfg.validate(), Err(Error::Validation(_))));
    let mut cfg = load("two_spin.conf");
    cfg.mode = Mode::Qubit;
    assert!(matches!(cfg.validate(), Err(Error::Validation(_))));
}

#[test]
fn exit_codes() {
    let out = scratch("exit");
    let ok = bin().arg("--config").arg(config("naphthalene.conf")).arg("--out").arg(&out).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let bad = out.join("empty.conf");
    std::fs::write(&bad, "[run]\nmode = spectrum\n[molecule]\nname = nothing\n").unwrap();
    let r = bin().arg("--config").arg(&bad).output().unwrap();
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("at least one group"));

    std::fs::write(&bad, "[run]\nmode = spectrum\n\n[molecule\n").unwrap();
    let r = bin().arg("--config").arg(&bad).output().unwrap();
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 4"));

    let r = bin().arg("--config").arg(out.join("missing.conf")).output().unwrap();
    assert_eq!(r.status.code(), Some(3));

    let r = bin().arg("--config").arg(config("naphthalene.conf")).args(["--mode", "nonsense"]).output().unwrap();
    assert_eq!(r.status.code(), Some(1));

    assert_eq!(bin().output().unwrap().status.code(), Some(1));
}

#[test]
fn accuracy_failures_exit_with_2() {
    // a coarse step pushes the qubit comparison past its tolerance
    let out = scratch("accuracy");
    std::fs::create_dir_all(&out).unwrap();
    let text = std::fs::read_to_string(config("qubit.conf")).unwrap().replace("dt = 0.0025", "dt = 0.2");
    let cfg = out.join("coarse.conf");
    std::fs::write(&cfg, text).unwrap();
    let r = bin().arg("--config").arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("spin_half_qubit_report.json").exists());
}

#[test]
fn env_var_overrides_out() {
    let env_dir = scratch("env");
    let flag_dir = scratch("flag");
    let r = bin()
        .env("SPINLIND_OUT", &env_dir)
        .arg("--config")
        .arg(config("naphthalene.conf"))
        .arg("--out")
        .arg(&flag_dir)
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    assert!(env_dir.join("naphthalene_spectrum.csv").exists());
    assert!(!flag_dir.exists());
}
