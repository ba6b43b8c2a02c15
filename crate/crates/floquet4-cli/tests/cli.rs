use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn floquet4(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floquet4")).args(args).output().expect("binary runs")
}

fn run_with(dir: &TempDir, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    floquet4(&args)
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.lines().last().unwrap()).expect("stderr diagnostic is JSON")
}

#[test]
fn free_trace_matches_closed_forms() {
    let dir = TempDir::new().unwrap();
    let o = run_with(&dir, "trace", r#"{"potential":{"kind":"trig","coeffs":[]},"lambda_range":[-50,500],"points":23}"#, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/trace.csv"));
    assert_eq!(header, ["lambda", "T1", "rho", "Delta1_re", "Delta1_im", "Delta2_re", "Delta2_im", "Dplus", "Dminus"]);
    assert_eq!(rows.len(), 23);
    for r in rows.iter().filter(|r| r[0] > 0.0) {
        let z = r[0].powf(0.25);
        assert!((r[3] - z.cosh()).abs() < 1e-12 * z.cosh());
        assert!((r[5] - z.cos()).abs() < 1e-10);
        assert!((r[1] - 0.5 * (z.cos() + z.cosh())).abs() < 1e-12 * z.cosh());
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let config = r#"{"potential":{"kind":"trig","coeffs":[[1,1,0],[2,0.25,0.5]]},"lambda_range":[-200,900],"points":40}"#;
    let texts: Vec<String> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            assert!(run_with(&dir, "trace", config, &["--threads", "1"]).status.success());
            std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap()
        })
        .collect();
    assert_eq!(texts[0], texts[1]);
    // 17 significant digits
    let first = texts[0].lines().nth(1).unwrap().split(',').next().unwrap().to_string();
    assert_eq!(first, "-2.0000000000000000e2");
}

#[test]
fn free_spectrum_report() {
    let dir = TempDir::new().unwrap();
    let o = run_with(&dir, "spectrum", r#"{"potential":{"kind":"trig","coeffs":[]},"n_max":4,"lambda_range":[-10,2000]}"#, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/spectrum.json")).unwrap()).unwrap();
    let periodic: Vec<f64> = report["eigenvalues"]["periodic"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let expected = [0.0, (2.0 * PI).powi(4), (2.0 * PI).powi(4), (4.0 * PI).powi(4), (4.0 * PI).powi(4)];
    assert_eq!(periodic.len(), expected.len());
    for (a, b) in periodic.iter().zip(expected) {
        assert!((a - b).abs() <= 1e-8 * b.max(1.0));
    }
    let real: Vec<f64> = report["resonances"]["real"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((real[1] + 4.0 * PI.powi(4)).abs() < 1e-8 * PI.powi(4));
    assert_eq!(report["bands"][0]["mult"], 2);
}

#[test]
fn inverse_harmonic_gaps() {
    let dir = TempDir::new().unwrap();
    let coeffs: Vec<String> = (1..=6).map(|n| format!("[{n},{},0]", 1.0 / n as f64)).collect();
    let config = format!(r#"{{"potential":{{"kind":"trig","coeffs":[{}]}},"n_range":[2,3]}}"#, coeffs.join(","));
    let o = run_with(&dir, "asymptotics", &config, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out/asymptotics_eigenvalues.csv"));
    assert_eq!(&header[..6], ["n", "lambda_minus", "lambda_plus", "predicted", "residual", "normalized_residual"]);
    for r in rows {
        let n = r[0];
        assert!((r[6] - 2.0 / n).abs() < 0.05 / n, "gap {} at n = {n}", r[6]);
    }
}

#[test]
fn small_gamma_outputs() {
    let dir = TempDir::new().unwrap();
    let o = run_with(&dir, "small-gamma", r#"{"potential":{"kind":"trig","coeffs":[[1,1,0]]},"gammas":[0.1,0.05,0.02,0.01]}"#, &[]);
    assert!(o.status.success());
    let (header, rows) = read_csv(&dir.path().join("out/small_gamma.csv"));
    assert_eq!(header, ["gamma", "r0_minus", "lambda0_plus", "gap", "predicted_leading"]);
    assert!(rows.iter().all(|r| r[3] > 0.0));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/small_gamma.json")).unwrap()).unwrap();
    let slope = summary["slope"].as_f64().unwrap();
    assert!((slope - 4.0).abs() < 0.1);
}

#[test]
fn delta_comb_trajectory_crosses_the_double_root() {
    let dir = TempDir::new().unwrap();
    let o = run_with(&dir, "delta-comb", r#"{"indices":[3],"nu_range":[-1e-3,1e-3],"steps":5}"#, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&dir.path().join("out/delta_comb_n3.csv"));
    assert_eq!(rows.len(), 5);
    assert!(rows[0][2] > 0.0 && rows[0][4] == -rows[0][2]);
    assert!(rows[2][1] == rows[2][3] && rows[2][2] == 0.0);
    assert!(rows[4][2] == 0.0 && rows[4][1] > rows[4][3]);
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = run_with(&dir, "spectrum", r#"{"potential":{"kind":"trig","coeffs":[[0,1,0]]}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["code"], "InvalidPotential");

    let o = run_with(&dir, "trace", "{\n  \"potential\": {\"kind\": \"trig\", \"coeffs\": []},\n  \"lambda_rang\": [0, 1]\n}", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains(":3:"));

    let o = run_with(&dir, "trace", r#"{"command":"spectrum","potential":{"kind":"trig","coeffs":[]},"lambda_range":[0,1]}"#, &[]);
    assert_eq!(o.status.code(), Some(2));

    let o = run_with(&dir, "trace", r#"{"potential":{"kind":"trig","coeffs":[]},"lambda_range":[0,1]}"#, &["--tol", "-1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run_with(&dir, "trace", r#"{"potential":{"kind":"delta_comb","gamma":1},"lambda_range":[0,1],"backend":"ode"}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["code"], "BackendMismatch");

    let o = run_with(&dir, "delta-comb", r#"{"indices":[2],"nu_range":[-0.9,0.9]}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["code"], "OutsideBracket");
}
