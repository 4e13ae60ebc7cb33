use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fkdv(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkdv"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove(fkdv::cli::OUTPUT_DIR_ENV)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_kdv_writes_profile_report_and_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkdv(
        &[
            "solve", "--alpha", "2", "--p", "1", "--c", "1", "--l", "256", "--N", "4096",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&dir.path().join("report.json"));
    assert!((report["amplitude"].as_f64().unwrap() - 3.0).abs() < 1e-6);
    assert_eq!(report["converged_by"], "residual");
    assert!(report["wall_time_seconds"].as_f64().is_some());

    let profile = fkdv::cli::read_profile(&dir.path().join("profile.csv")).unwrap();
    assert_eq!(profile.len(), 4096);

    // the echo reloads to the same settings and reproduces the profile bit for bit
    let again = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    let out = fkdv(&["solve", "--config", run.to_str().unwrap()], again.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("profile.csv")).unwrap(),
        std::fs::read(again.path().join("profile.csv")).unwrap()
    );
}

#[test]
fn limiting_alpha_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkdv(
        &["solve", "--alpha", "0.3333333", "--p", "1", "--c", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn negative_speed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkdv(
        &["solve", "--alpha", "2", "--p", "1", "--c", "-1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("c > 0"));
}

#[test]
fn iteration_budget_exhaustion_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkdv(&["solve", "--alpha", "1.5", "--max-iter", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["converged_by"], "max_iter");
    assert_eq!(report["iterations"], 3);
}

#[test]
fn sweep_with_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkdv(
        &[
            "sweep",
            "--alpha",
            "1.2",
            "--p",
            "2",
            "--c",
            "0.25,0.5,0.75,1,1.25,1.5,1.75,2",
            "--l",
            "128",
            "--N",
            "4096",
            "--fit",
            "--jobs",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("alpha,p,c,amplitude,iterations,converged\n"));
    assert_eq!(csv.lines().count(), 9);
    let fits = json(&dir.path().join("fit.json"));
    let fit = &fits[0]["fit"];
    assert!((fit["a"].as_f64().unwrap() - 2.934).abs() < 0.02 * 2.934);
    assert!((fit["b"].as_f64().unwrap() - 0.5).abs() < 0.01);
}

#[test]
fn single_row_sweep_has_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = fkdv(
        &["sweep", "--alpha", "1.2", "--c", "1", "--fit"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let fits = json(&dir.path().join("fit.json"));
    assert!(fits[0]["fit"].is_null());
    assert!(fits[0]["error"].as_str().unwrap().contains("at least 3"));
}

#[test]
fn phase_of_kdv_soliton_reaches_the_crest() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        fkdv(&["solve", "--N", "1024", "--l", "64"], dir.path())
            .status
            .code(),
        Some(0)
    );
    let profile = dir.path().join("profile.csv");
    let out = fkdv(
        &["phase", "--profile", profile.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("phase.csv")).unwrap();
    let crest = text.lines().skip(1).any(|line| {
        let (phi, dphi) = line.split_once(',').unwrap();
        let (phi, dphi): (f64, f64) = (phi.parse().unwrap(), dphi.parse().unwrap());
        (phi - 3.0).abs() < 1e-6 && dphi.abs() < 1e-6
    });
    assert!(crest);
}

#[test]
fn fit_of_exact_data_and_of_too_few_points() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.csv");
    std::fs::write(&points, "x,y\n1,3\n2,6\n3,9\n4,12\n").unwrap();
    let out = fkdv(&["fit", "--points", points.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let fit = json(&dir.path().join("fit.json"));
    assert!((fit["a"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!((fit["b"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    std::fs::write(&points, "1,3\n2,6\n").unwrap();
    let out = fkdv(&["fit", "--points", points.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("points.csv");
    std::fs::write(&points, "x,y\n1,3\n2,six\n3,9\n").unwrap();
    let out = fkdv(&["fit", "--points", points.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn evolve_zero_field_and_grid_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let grid = fkdv::spectral::Grid::new(16.0, 128).unwrap();
    let zero = dir.path().join("zero.csv");
    fkdv::cli::write_profile(&zero, &fkdv::spectral::Field::zeros(&grid), &[]).unwrap();
    let args = [
        "evolve",
        "--profile",
        zero.to_str().unwrap(),
        "--l",
        "16",
        "--dt",
        "0.1",
        "--tfinal",
        "1",
    ];

    let mismatch = fkdv(&[&args[..], &["--N", "256"]].concat(), dir.path());
    assert_eq!(mismatch.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("does not match"));

    let out = fkdv(
        &[&args[..], &["--N", "128", "--snapshot-stride", "5"]].concat(),
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let diag = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(lines.next(), Some("t,amplitude,peak_position,C,M,E"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let cols: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(&cols[3..], &[0.0, 0.0, 0.0]);
    }
    assert_eq!(
        std::fs::read_dir(dir.path().join("snapshots"))
            .unwrap()
            .count(),
        3
    );
}

#[test]
fn evolve_order_check_reports_energy_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let grid = fkdv::spectral::Grid::new(32.0, 256).unwrap();
    let bump = fkdv::spectral::Field::from_fn(&grid, |x| 0.5 * (-x * x / 16.0).exp()).unwrap();
    let initial = dir.path().join("bump.csv");
    fkdv::cli::write_profile(&initial, &bump, &[]).unwrap();
    let out = fkdv(
        &[
            "evolve",
            "--profile",
            initial.to_str().unwrap(),
            "--alpha",
            "0.7",
            "--l",
            "32",
            "--N",
            "256",
            "--dt",
            "0.1",
            "--tfinal",
            "2",
            "--order-check",
        ],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(&dir.path().join("summary.json"));
    let ratio = summary["energy_drift_ratio"].as_f64().unwrap();
    assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fkdv"))
        .args(["solve", "--N", "512", "--l", "32"])
        .env(fkdv::cli::OUTPUT_DIR_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("report.json").exists());
}
