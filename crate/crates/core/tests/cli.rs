//! End-to-end checks of the `bgchaos` binary: exit-code families, the kernel
//! file format, config-file override, CSV artifacts and the seed
//! environment variable.

use std::fs;
use std::process::Command;

fn bgchaos() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bgchaos"))
}

#[test]
fn cumulants_from_kernel_file() {
    let dir = tempfile::tempdir().unwrap();
    let kernel_path = dir.path().join("k.txt");
    fs::write(&kernel_path, "2\n1 0\n0 -1\n").unwrap();
    let out_path = dir.path().join("report.json");

    let status = bgchaos()
        .args(["cumulants", "--kernel"])
        .arg(&kernel_path)
        .args(["--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let kappa = report["result"]["kernel"]["exact"]["kappa"]
        .as_array()
        .unwrap();
    // diag(1,-1): kappa_2 = 4, kappa_4 = 96, odd orders vanish.
    assert_eq!(kappa[1].as_f64().unwrap(), 4.0);
    assert_eq!(kappa[3].as_f64().unwrap(), 96.0);
    assert_eq!(kappa[2].as_f64().unwrap(), 0.0);
}

#[test]
fn exit_code_families() {
    // Missing kernel file: configuration error.
    let status = bgchaos()
        .args(["cumulants", "--kernel", "/nonexistent/kernel.txt"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Non-positive parameter: validation error.
    let status = bgchaos()
        .args(["stein", "--bg", "0,1,2,1", "--identity-only"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    // Inapplicable bound constants: bound-applicability error.
    let status = bgchaos()
        .args([
            "bound",
            "--variant",
            "bg",
            "--bg",
            "1,1,1,1",
            "--spectrum",
            "0.5,-0.5",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));

    // Success path exits zero.
    let status = bgchaos()
        .args(["cumulants", "--bg", "2,1,2,1"])
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let out_path = dir.path().join("report.json");
    fs::write(&cfg_path, r#"{"bg": "3,1,3,1"}"#).unwrap();

    let status = bgchaos()
        .args(["cumulants", "--bg", "2,1,2,1", "--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["config"]["bg"].as_str().unwrap(), "3,1,3,1");
    // Laplace(3): kappa_2 = 2/9.
    let kappa = report["result"]["target"]["exact"]["kappa"]
        .as_array()
        .unwrap();
    assert!((kappa[1].as_f64().unwrap() - 2.0 / 9.0).abs() < 1e-15);
}

#[test]
fn stein_identity_only_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("stein.json");
    let status = bgchaos()
        .args([
            "stein",
            "--bg",
            "2,1,2,1",
            "--identity-only",
            "--samples",
            "200000",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let rows = report["identity"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for row in rows {
        assert!(
            row["pass"].as_bool().unwrap(),
            "identity row failed: {row}"
        );
    }
    assert!(report.get("solver").is_none());
}

#[test]
fn converge_writes_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("traj.csv");
    let status = bgchaos()
        .args([
            "converge",
            "--mode",
            "clt",
            "--levels",
            "1,4,16",
            "--mc",
            "20000",
            "--seed",
            "5",
            "--out",
        ])
        .arg(&csv_path)
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "n,bound_total,kappa2,kappa6,w1_vs_normal");
    assert_eq!(lines.count(), 3);
}

#[test]
fn env_var_supplies_default_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let status = bgchaos()
        .env("BGCHAOS_SEED", "777")
        .args(["cumulants", "--bg", "2,1,2,1", "--mc", "32000", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["seed"].as_u64().unwrap(), 777);
}

#[test]
fn stein_solver_writes_grid_csvs() {
    // A reduced grid keeps this end-to-end run quick; accuracy claims live
    // in the acceptance suite.
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("stein.json");
    let csv_dir = dir.path().join("grids");
    let status = bgchaos()
        .args([
            "stein",
            "--bg",
            "2,1,2,1",
            "--grid-size",
            "1024",
            "--time-nodes",
            "32",
            "--samples",
            "100000",
            "--seed",
            "4",
            "--csv-dir",
        ])
        .arg(&csv_dir)
        .args(["--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    let solver = report["solver"].as_array().unwrap();
    assert_eq!(solver.len(), 10);
    for row in solver {
        assert!(row["pass"].as_bool().unwrap(), "solver row failed: {row}");
    }
    assert!(report["semigroup"]["limit_pass"].as_bool().unwrap());

    let count = fs::read_dir(&csv_dir).unwrap().count();
    assert_eq!(count, 10);
    let any = fs::read_dir(&csv_dir).unwrap().next().unwrap().unwrap();
    let text = fs::read_to_string(any.path()).unwrap();
    assert!(text.starts_with("x,value\n"));
    assert_eq!(text.lines().count(), 1025);
}
