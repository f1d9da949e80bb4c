use std::path::Path;
use std::process::{Command, Output};

fn dsgrav(args: &[&str], env_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dsgrav"));
    cmd.args(args).env_remove("DSGRAV_OUT_DIR");
    if let Some(d) = env_dir {
        cmd.env("DSGRAV_OUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn out_dir(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    let (a, b) = (root.path().join("a"), root.path().join("b"));
    for d in [&a, &b] {
        let o = dsgrav(
            &["--seed", "5", "--out-dir", &out_dir(d), "lattice", "--levels", "2"],
            None,
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["lattice.json", "lattice.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn stdout_lists_checks_and_wall_time_goes_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsgrav(
        &["--out-dir", &out_dir(dir.path()), "algebra", "--mode", "poincare"],
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("PASS poincare.vv_residual value=0e0"));
    assert!(!stdout.contains("wall time"));
    assert!(String::from_utf8(o.stderr).unwrap().contains("wall time"));
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("algebra.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], "1.0.0");
    assert_eq!(json["outputs"].as_array().unwrap().len(), 1);
}

#[test]
fn environment_sets_the_output_directory_and_the_flag_wins() {
    let root = tempfile::tempdir().unwrap();
    let (env, flag) = (root.path().join("env"), root.path().join("flag"));
    assert_eq!(dsgrav(&["pulsar"], Some(&env)).status.code(), Some(0));
    assert!(env.join("pulsar.json").exists());
    assert_eq!(
        dsgrav(&["--out-dir", &out_dir(&flag), "--stem", "ht", "pulsar"], Some(&env))
            .status
            .code(),
        Some(0)
    );
    assert!(flag.join("ht.json").exists() && !env.join("ht.json").exists());
}

#[test]
fn missing_unit_is_rejected_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out");
    let o = dsgrav(&["--out-dir", &out_dir(&target), "orbit", "--mass", "1"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("has no unit"));
    assert!(!target.exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"orbit","parameters":{"eccentricity":0.1}}"#).unwrap();
    let o = dsgrav(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            &out_dir(dir.path()),
            "run",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("eccentricity"));
}

#[test]
fn config_run_uses_its_output_block_and_flags_override_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let target = dir.path().join("cfg-out");
    let text = format!(
        r#"{{"scenario":"cosmo","parameters":{{"mode":"poincare","samples":5}},"output":{{"dir":{:?},"stem":"pc"}}}}"#,
        target.to_str().unwrap()
    );
    std::fs::write(&cfg, text).unwrap();
    let o = dsgrav(&["--config", cfg.to_str().unwrap(), "cosmo", "--samples", "7"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(target.join("pc.csv")).unwrap();
    assert_eq!(csv.lines().count(), 8);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(target.join("pc.json")).unwrap()).unwrap();
    assert_eq!(json["inputs"]["params"]["mode"], "poincare");
}

#[test]
fn mismatched_config_scenario_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario":"pulsar","parameters":{}}"#).unwrap();
    let o = dsgrav(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            &out_dir(dir.path()),
            "algebra",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_check_gives_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    // Two coarse levels cannot resolve a second-order rate at this amplitude.
    let o = dsgrav(
        &[
            "--out-dir",
            &out_dir(dir.path()),
            "lattice",
            "--eps",
            "1",
            "--levels",
            "2",
            "--amplitude",
            "3",
        ],
        None,
    );
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(o.status.code(), Some(1), "{stdout}");
    assert!(stdout.contains("FAIL fitted_order"));
}

#[test]
fn empty_sweep_writes_a_header_only_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"scenario":"pulsar","parameters":{"action":"sweep","eccentricities":""}}"#,
    )
    .unwrap();
    let o = dsgrav(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            &out_dir(dir.path()),
            "run",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("pulsar-sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("e,enhancement,pdot"));
}

#[test]
fn unbound_orbit_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dsgrav(&["--out-dir", &out_dir(dir.path()), "pulsar", "--e", "1.2"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("bound orbit"));
}
