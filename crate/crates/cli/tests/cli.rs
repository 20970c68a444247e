//! End-to-end checks of the command-line interface: emitted files, exit
//! codes, and the scenario surface.

use std::path::PathBuf;
use std::process::Command;

fn cwmeas() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cwmeas"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cwmeas-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn free_energy_emits_three_default_curves() {
    let out = temp_dir("curves");
    let status = cwmeas()
        .args(["free-energy", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in [
        "free_energy_1.csv",
        "free_energy_2.csv",
        "free_energy_3.csv",
    ] {
        let body = std::fs::read_to_string(out.join(name)).unwrap();
        let mut lines = body.lines();
        assert!(lines.next().unwrap().starts_with("# T="));
        assert_eq!(lines.next().unwrap(), "m,F_per_spin");
        assert_eq!(lines.count(), 2001);
    }
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("curve_1.g = 0.0000000000000000e0"));
    assert!(summary.contains("curve_2.g = 2.0000000000000000e-2"));
    assert!(summary.contains("curve_3.g = 5.0000000000000003e-2"));
}

#[test]
fn register_snapshots_use_declared_schema() {
    let out = temp_dir("register");
    let dir = temp_dir("register-conf");
    let config = dir.join("fast.conf");
    std::fs::write(
        &config,
        "scenario = register\nparams.N = 20\nschedule.t_couple = 50\nschedule.t_relax = 20\n",
    )
    .unwrap();
    let status = cwmeas()
        .arg("register")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["register_up.csv", "register_down.csv"] {
        let body = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(body.starts_with("t,m,p\n"));
        // 6 default snapshots over a 21-site lattice
        assert_eq!(body.lines().count(), 1 + 6 * 21);
    }
}

#[test]
fn oracle_check_reports_tiny_deviations() {
    let out = temp_dir("oracle");
    let dir = temp_dir("oracle-conf");
    let config = dir.join("oracle.conf");
    std::fs::write(
        &config,
        "scenario = oracle-check\n\
         oracle.n_enum = 8\n\
         oracle.n_evolve = 6\n\
         oracle.t_final = 40\n\
         oracle.dt = 0.005\n\
         oracle.samples = 30\n",
    )
    .unwrap();
    let status = cwmeas()
        .arg("oracle-check")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    let value = |key: &str| -> f64 {
        summary
            .lines()
            .find_map(|line| {
                let (k, v) = line.split_once(" = ")?;
                (k == key).then(|| v.parse().unwrap())
            })
            .unwrap_or_else(|| panic!("missing {key}"))
    };
    assert!(value("enumeration.max_deviation") < 1e-12);
    assert!(value("enumeration.max_quartic_effect") < 1e-12);
    assert!(value("correlation.max_deviation") < 1e-10);
    // ideal coupling by default: diagonal conserved
    assert!(value("nonideal.max_born_deviation") < 1e-12);
    assert!(value("nonideal.max_norm_drift") < 1e-8);
    assert!(out.join("oracle_enumeration.csv").exists());
    let nonideal = std::fs::read_to_string(out.join("oracle_nonideal.csv")).unwrap();
    assert!(nonideal.starts_with("t,r_uu,re_r_ud,im_r_ud,delta\n"));
}

#[test]
fn guard_violation_exits_with_code_3() {
    let out = temp_dir("guard");
    let dir = temp_dir("guard-conf");
    let config = dir.join("coarse.conf");
    std::fs::write(&config, "scenario = register\nschedule.dt = 50\n").unwrap();
    let output = cwmeas()
        .arg("register")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("suggested dt"), "stderr: {stderr}");
}

#[test]
fn validation_failure_exits_with_code_2() {
    let dir = temp_dir("invalid-conf");
    let config = dir.join("bad.conf");
    std::fs::write(&config, "scenario = measure\nparams.T = -1\n").unwrap();
    let output = cwmeas()
        .arg("measure")
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // mismatch between the command line and the document
    let config2 = dir.join("mismatch.conf");
    std::fs::write(&config2, "scenario = dephase\n").unwrap();
    let output = cwmeas()
        .arg("measure")
        .arg("--config")
        .arg(&config2)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn seed_and_out_overrides_apply() {
    let out = temp_dir("override");
    let dir = temp_dir("override-conf");
    let config = dir.join("measure.conf");
    std::fs::write(
        &config,
        "scenario = measure\n\
         params.N = 30\n\
         schedule.t_couple = 300\n\
         schedule.t_relax = 100\n\
         register.m_threshold = 0.9\n\
         sampling.n_runs = 50\n\
         sampling.seed = 7\n",
    )
    .unwrap();
    let status = cwmeas()
        .arg("measure")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "99"])
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("sampling.seed = 99"));
    let records = std::fs::read_to_string(out.join("measure_records.csv")).unwrap();
    assert!(records.lines().nth(1).unwrap().ends_with(",99"));
}
