use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn harmrand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_harmrand")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

/// `p/q` or `p` as an exact pair of big-enough integers.
fn fraction(s: &str) -> (u128, u128) {
    match s.split_once('/') {
        Some((p, q)) => (p.parse().unwrap(), q.parse().unwrap()),
        None => (s.parse().unwrap(), 1),
    }
}

#[test]
fn fourier_trace_jumps_reach_beta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let o = harmrand(&["build", "--construction", "fourier", "--target", "0", "--p", "2", "--C", "1", "--n-max", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&out.join("fourier_trace.csv"));
    assert_eq!(header, ["n", "value_re", "value_im", "jump"]);
    let checkpoints: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(checkpoints, [1, 64, 729, 4096]);
    let beta = 4.0 / (PI * PI);
    // Every checkpoint is reached by some kernel peak at t = 0.
    for r in &rows {
        let jump: f64 = r[3].parse().unwrap();
        assert!(jump >= beta - 1e-9, "jump {jump} at N={}", r[0]);
    }
    let dump = read_json(&out.join("construction.json"));
    assert_eq!(dump["construction"], "fourier");
    assert_eq!(dump["stages"].as_array().unwrap().len(), 4);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["passed"], true);
}

#[test]
fn schnorr_trace_respects_radial_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = harmrand(&["build", "--construction", "schnorr-poisson", "--m-max", "24", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&out.join("poisson_trace.csv"));
    assert_eq!(header, ["y", "value", "lower_bound", "bound_active"]);
    let at = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == (-10f64).exp2()).expect("y = 2^-10 row");
    assert_eq!(at[3], "true");
    let value: f64 = at[1].parse().unwrap();
    let bound = 3.0 * (2.0 - 0.5) / (5.0 * PI);
    assert!(value >= bound - 1e-6 && bound > 0.2864, "{value} vs {bound}");
    for r in rows.iter().filter(|r| r[3] == "true") {
        assert!(r[1].parse::<f64>().unwrap() >= r[2].parse::<f64>().unwrap() - 1e-6);
    }
}

#[test]
fn ml_norms_are_exact_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = harmrand(&["build", "--construction", "ml-poisson", "--target", "1/3", "--s-max", "41", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&out.join("ml_norms.csv"));
    assert_eq!(header[..4], ["s", "intervals", "l1_norm", "norm_bound"]);
    assert_eq!(rows.len(), 42);
    for r in &rows {
        let s: u32 = r[0].parse().unwrap();
        let (p, q) = fraction(&r[2]);
        if s % 2 == 0 {
            assert_eq!(r[2], "0");
            continue;
        }
        let n = (s - 1) / 2;
        // p/q <= (2n+1)/2^n iff p·2^n <= (2n+1)·q.
        let lhs = p.checked_mul(1u128 << n);
        let rhs = q.checked_mul(2 * n as u128 + 1);
        match (lhs, rhs) {
            (Some(l), Some(r)) => assert!(l <= r, "s={s}: {p}/{q}"),
            _ => assert!((p as f64 / q as f64) <= (2 * n + 1) as f64 / f64::from(n).exp2()),
        }
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.toml");
    fs::write(&cfg, "construction = \"ml_poisson\"\ntarget_point = \"1/3\"\ns_max = 15\n").unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = harmrand(&["build", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap())
            .map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0].len(), 5);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.json");
    fs::write(&cfg, r#"{"construction": "ml_poisson", "s_max": 41}"#).unwrap();
    let out = dir.path().join("o");
    let o = harmrand(&["build", "--config", cfg.to_str().unwrap(), "--s-max", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv_rows(&out.join("ml_norms.csv"));
    assert_eq!(rows.len(), 6);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&harmrand(&["build", "--construction", "nonsense"])), 2);
    assert_eq!(code(&harmrand(&["no-such-command"])), 2);
    let o = harmrand(&["build", "--construction", "fourier", "--p", "1", "--C", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("p: ") && err.contains("C: "), "{err}");
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"target_point": "1/0"}"#).unwrap();
    let o = harmrand(&["build", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("target_point"));
    let o = harmrand(&["poisson-trace", "--heights", "0.5,1", "--out", dir.path().join("t.csv").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_all_zero_caps_skips_everything() {
    let o = harmrand(&["verify-all", "--zero-caps"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], true);
    let entries = report["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["status"] == "skipped"));
}

#[test]
fn corruption_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let caps = dir.path().join("caps.toml");
    fs::write(&caps, "fejer_degrees = 9\nfejer_bound_degrees = 0\na_p_range = 0\nfourier_stages = 0\nschnorr_stages = 0\nml_stages = 0\nderived_stages = 0\nderived_sequence = 0\nweak_type_functions = 0\nsamples = 0\n").unwrap();
    let o = harmrand(&["verify-all", "--caps", caps.to_str().unwrap(), "--corrupt-fejer"]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["status"] == "fail")
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["fejer.coefficients"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("fejer.coefficients"));
    let clean = harmrand(&["verify-all", "--caps", caps.to_str().unwrap()]);
    assert_eq!(code(&clean), 0);
}

#[test]
fn kernel_check_passes() {
    let o = harmrand(&["kernel-check", "--degrees", "20", "--bound-degrees", "50", "--samples", "200"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let ids: Vec<&str> = report["entries"].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"fejer.coefficients") && ids.contains(&"poisson.unit_mass"), "{ids:?}");
}

#[test]
fn poisson_trace_of_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    fs::write(&f, r#"{"kind": "step", "pieces": [{"lo": "-1", "hi": "1", "lo_closed": true, "hi_closed": true, "value": "1"}]}"#)
        .unwrap();
    let o = harmrand(&["poisson-trace", "--input", f.to_str().unwrap(), "--x", "0", "--heights", "1,0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let first: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - 0.5).abs() < 1e-15);
}

#[test]
fn weak_type_check_from_file_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("tent.json");
    fs::write(&f, r#"{"kind": "linear", "vertices": [["0", "0"], ["1/4", "1"], ["3/4", "1"], ["1", "0"]]}"#).unwrap();
    let o = harmrand(&["weak-type-check", "--input", f.to_str().unwrap(), "--alpha", "0.25,1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["functions"][0]["reports"].as_array().unwrap().len(), 2);
    let o = harmrand(&["weak-type-check", "--seed", "4", "--count", "2", "--alpha", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&harmrand(&["weak-type-check", "--alpha", "-1", "--count", "1"])), 2);
}
