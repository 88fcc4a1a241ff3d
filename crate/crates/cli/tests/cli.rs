//! End-to-end tests of the binary: exit codes, output schemas, and
//! byte-level determinism of the CSV bodies.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ml-floquet"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn period_forward_and_roots() {
    let v = stdout_json(&run(&["period", "--A", "0.01"]));
    let t = v["T"].as_f64().unwrap();
    assert!((t - 14.252032392887296).abs() < 1e-9);
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 3);
}

#[test]
fn period_invert_below_minimum_is_domain_error() {
    let out = run(&["period", "--invert", "--T", "10.0"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("domain"), "stderr: {msg}");
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = run(&["period", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_subcommand_is_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn orbit_csv_rows_live_on_the_simplex() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let out = run(&[
        "orbit",
        "--A",
        "0.02",
        "--samples",
        "64",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "t,u,v,w");
    let mut n = 0;
    for line in lines {
        let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 4);
        assert!((vals[1] + vals[2] + vals[3] - 1.0).abs() < 1e-10);
        n += 1;
    }
    assert_eq!(n, 64);
    assert!(Path::new(&format!("{}.manifest.json", csv.display())).exists());
}

#[test]
fn scan_finds_unstable_band_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv1 = dir.path().join("scan1.csv");
    let csv2 = dir.path().join("scan2.csv");
    for csv in [&csv1, &csv2] {
        let out = run(&[
            "scan",
            "--T",
            "39.22",
            "--D",
            "1,0,0",
            "--k2-max",
            "1.5",
            "--steps",
            "30",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let b1 = std::fs::read(&csv1).unwrap();
    let b2 = std::fs::read(&csv2).unwrap();
    assert_eq!(b1, b2, "CSV bodies must be byte-identical across reruns");

    let body = String::from_utf8(b1).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "k2,abs_mu1,re_mu1,im_mu1,abs_mu2,mu3");
    let unstable = lines
        .filter(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() > 1.0)
        .count();
    assert!(unstable > 0, "no |mu1| > 1 rows at T = 39.22");

    // Manifest carries the command, tolerances, and outputs.
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(format!("{}.manifest.json", csv1.display())).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "scan");
    assert!(manifest["tolerances"]["integration"].as_f64().unwrap() > 0.0);
    assert!(manifest["wall_time_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn monodromy_json_shape() {
    let v = stdout_json(&run(&[
        "monodromy",
        "--T",
        "16.7",
        "--k2",
        "0.6",
        "--D",
        "1,0,0",
    ]));
    assert_eq!(v["multipliers"].as_array().unwrap().len(), 3);
    let abs1 = v["multipliers"][0]["abs"].as_f64().unwrap();
    assert!((abs1 - 0.5279).abs() < 1e-2, "|mu1| = {abs1}");
    assert!(v["det_rel_err"].as_f64().unwrap() < 1e-5);
}

#[test]
fn alpha_routes_agree() {
    let v = stdout_json(&run(&["alpha", "--A", "0.01", "--route", "both"]));
    let f = v["alpha_fourier"].as_f64().unwrap();
    let n = v["alpha_numeric"].as_f64().unwrap();
    assert!(f < 0.0 && n < 0.0);
    assert!(((f - n) / f).abs() < 0.01, "fourier {f} vs numeric {n}");
}

#[test]
fn alpha_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("alpha.csv");
    let out = run(&[
        "alpha",
        "--sweep",
        "0.01,0.03,3",
        "--route",
        "numeric",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "A,x,alpha_fourier,alpha_numeric");
    assert_eq!(lines.count(), 3);
}

#[test]
fn critical_reproduces_threshold() {
    let v = stdout_json(&run(&["critical", "--D", "1,0,0", "--tol", "1e-9"]));
    let t_star = v["T_star"].as_f64().unwrap();
    let k2 = v["k_star2"].as_f64().unwrap();
    assert!((t_star - 22.86).abs() < 0.2, "T* = {t_star}");
    assert!((k2 - 0.62).abs() < 0.05, "k*^2 = {k2}");
    let mu_re = v["mu_at_kstar"]["re"].as_f64().unwrap();
    assert!((mu_re + 1.0).abs() < 5e-3, "mu = {mu_re}");
}

#[test]
fn general_scan_on_symmetric_family() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("general.csv");
    let out = run(&[
        "general",
        "--alphas",
        "2,2,2",
        "--betas",
        "0,0,0",
        "--seed-ray",
        "0.4",
        "--k2-max",
        "1.0",
        "--steps",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert!(v["T"].as_f64().unwrap() > 10.8);
    assert!(v["closure_gap"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["continuum_residual"].as_f64().unwrap(), 0.0);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("k2,abs_mu1"));
}

#[test]
fn general_refuses_broken_continuum() {
    let out = run(&[
        "general",
        "--alphas",
        "2,2,2",
        "--betas",
        "0.5,0,0",
        "--seed-ray",
        "0.4",
        "--k2-max",
        "1.0",
        "--steps",
        "4",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dns_produces_strobe_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dns.json");
    let csv = dir.path().join("dns.csv");
    // One mode on a small grid, two periods.
    std::fs::write(
        &cfg,
        serde_json::json!({
            "A": 0.02,
            "L": 8.0,
            "N": 32,
            "dt": 0.02,
            "t_end": 26.0,
            "eps0": 1e-5,
            "k_pert": 2.0 * std::f64::consts::PI / 8.0,
            "D": [0.5, 0.0, 0.0],
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&[
        "dns",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    let v = stdout_json(&out);
    assert!(v["strobes"].as_u64().unwrap() >= 3);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("t,amp_u_re,amp_u_im,amp_v_re,amp_v_im,amp_w_re,amp_w_im"));
}

#[test]
fn scan_output_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for jobs in ["1", "4"] {
        let csv = dir.path().join(format!("scan{jobs}.csv"));
        let out = run(&[
            "scan", "--jobs", jobs, "--T", "16.7", "--D", "1,0,0", "--k2-max", "0.8",
            "--steps", "16", "--out", csv.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        bodies.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(bodies[0], bodies[1], "worker count must not affect output");
}

#[test]
fn jobs_env_fallback_accepted() {
    let out = bin()
        .env("ML_FLOQUET_JOBS", "1")
        .args(["period", "--A", "0.02"])
        .output()
        .unwrap();
    assert!(out.status.success());
}
