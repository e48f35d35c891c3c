//! End-to-end tests of the `swapcorr` binary: exit codes, output formats,
//! determinism, and the documented example values.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swapcorr"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("swapcorr-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn correlations_werner_half() {
    let out = run(&["correlations", "--family", "werner", "--p", "0.5"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["B"].as_f64().unwrap(), 0.0);
    assert!((v["C"].as_f64().unwrap() - 0.25).abs() <= 1e-9);
    assert!((v["Omega"].as_f64().unwrap() - 0.5946035575013605).abs() <= 1e-9);
    assert!((v["chi"].as_f64().unwrap() + 0.125).abs() <= 1e-12);
}

#[test]
fn correlations_bell_all_ones() {
    let out = run(&["correlations", "--family", "bell", "--n", "0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    for key in ["B", "BF3", "D", "C", "Omega"] {
        assert!((v[key].as_f64().unwrap() - 1.0).abs() <= 1e-9, "{key}");
    }
}

#[test]
fn correlations_csv_format() {
    let out = run(&[
        "correlations",
        "--family",
        "werner",
        "--p",
        "0.9",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "B,BF3,D,C,Omega,s1,s2,s3,chi");
    let row: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((row[0] - 0.62).abs() <= 1e-12);
}

#[test]
fn malformed_state_file_exits_two() {
    let path = temp_path("bad.json");
    std::fs::write(&path, "{this is not json").unwrap();
    let out = run(&["correlations", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    std::fs::remove_file(&path).ok();
}

#[test]
fn unknown_flag_exits_two() {
    let out = run(&["correlations", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn swap_all_singlets() {
    let out = run(&["swap", "--ab", "bell:0", "--cd", "bell:0", "--effect", "0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!((v["probability"].as_f64().unwrap() - 0.25).abs() <= 1e-12);
    let r = v["R"].as_array().unwrap();
    for (i, sign) in [1.0, -1.0, -1.0, -1.0].iter().enumerate() {
        let diag = r[i].as_array().unwrap()[i].as_f64().unwrap();
        assert!((diag - sign).abs() <= 1e-12);
    }
}

#[test]
fn chain_of_singlets_from_file() {
    let bell_r = serde_json::json!({
        "d": 2,
        "R": [[1.0,0.0,0.0,0.0],[0.0,-1.0,0.0,0.0],[0.0,0.0,-1.0,0.0],[0.0,0.0,0.0,-1.0]]
    });
    let effect_r = serde_json::json!({
        "d": 2,
        "R": [[0.25,0.0,0.0,0.0],[0.0,-0.25,0.0,0.0],[0.0,0.0,-0.25,0.0],[0.0,0.0,0.0,-0.25]]
    });
    let chain = serde_json::json!({
        "sources": [bell_r, bell_r, bell_r],
        "measurements": [effect_r, effect_r],
    });
    let path = temp_path("chain.json");
    std::fs::write(&path, serde_json::to_string(&chain).unwrap()).unwrap();
    let out = run(&["chain", "--state", path.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!((v["probability"].as_f64().unwrap() - 1.0 / 16.0).abs() <= 1e-12);
    assert!((v["predicted_obesity"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(v["n_sources"].as_u64().unwrap(), 3);
    std::fs::remove_file(&path).ok();
}

#[test]
fn pathway_scan_two_steps() {
    let out = run(&["pathways", "--p", "0.9", "--steps", "2"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta,variant,B,BF3,D,C,Omega");
    // 2 theta points x 5 variants.
    assert_eq!(lines.len(), 1 + 10);
    assert!(lines[1].starts_with("0.0000000000000000e0,initial"));
    let pi4 = std::f64::consts::FRAC_PI_4;
    let last_theta: f64 = lines[10].split(',').next().unwrap().parse().unwrap();
    assert!((last_theta - pi4).abs() <= 1e-15);
}

#[test]
fn pathway_scan_full_size_and_byte_stability() {
    let a = run(&["pathways", "--p", "0.9", "--steps", "100"]);
    let b = run(&["pathways", "--p", "0.9", "--steps", "100"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "scan output must be byte-stable");
    let text = stdout_str(&a);
    assert_eq!(text.lines().count(), 1 + 500);
}

#[test]
fn pathway_scan_pure_bell_endpoint() {
    let out = run(&["pathways", "--p", "1.0", "--steps", "2"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    // Last block: theta = pi/4 with p = 1 is a Bell state; initial, fs and
    // sf all report 1 for every measure.
    for variant in ["initial", "fs", "sf"] {
        let line = text.lines().rfind(|l| l.contains(variant)).unwrap();
        let cells: Vec<&str> = line.split(',').collect();
        for cell in &cells[2..] {
            let v: f64 = cell.parse().unwrap();
            assert!((v - 1.0).abs() <= 1e-9, "{variant}: {line}");
        }
    }
}

#[test]
fn montecarlo_single_sample_deterministic() {
    let a = run(&[
        "montecarlo",
        "--ensemble",
        "x-form",
        "--n",
        "1",
        "--seed",
        "42",
    ]);
    let b = run(&[
        "montecarlo",
        "--ensemble",
        "x-form",
        "--n",
        "1",
        "--seed",
        "42",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout_str(&a);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,measure,fs,sf");
    assert_eq!(lines.len(), 1 + 5, "one sample emits one row per measure");
    assert!(lines[1].starts_with("0,B,"));
    // Summary lands on stderr when the CSV goes to stdout.
    let summary: serde_json::Value =
        serde_json::from_slice(&a.stderr).expect("summary JSON on stderr");
    assert_eq!(summary["samples"].as_u64().unwrap(), 1);
}

#[test]
fn montecarlo_summary_to_file() {
    let path = temp_path("mc.csv");
    let out = run(&[
        "montecarlo",
        "--ensemble",
        "general",
        "--n",
        "50",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(summary["samples"].as_u64().unwrap(), 50);
    let measures = summary["measures"].as_array().unwrap();
    assert_eq!(measures.len(), 1);
    assert_eq!(measures[0]["measure"].as_str().unwrap(), "Omega");
    assert_eq!(measures[0]["violations"].as_u64().unwrap(), 0);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("index,measure,fs,sf\n"));
    assert_eq!(csv.lines().count(), 1 + 50);
    std::fs::remove_file(&path).ok();
}

#[test]
fn gamma_scan_three_steps() {
    let out = run(&["gamma-scan", "--alpha", "0.4", "--steps", "3"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rho22,gamma_fs,gamma_sf_1,gamma_sf_2");
    assert_eq!(lines.len(), 4);
    let rho22: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!((rho22[0]).abs() <= 1e-15);
    assert!((rho22[1] - 0.2).abs() <= 1e-15);
    assert!((rho22[2] - 0.4).abs() <= 1e-15);
    // Case 1: Gamma_FS = Gamma_SF^(1) along the whole scan.
    for line in &lines[1..] {
        let cells: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((cells[1] - cells[2]).abs() <= 1e-9, "{line}");
        assert!(cells[1] >= cells[3] - 1e-9, "{line}");
    }
}

#[test]
fn gamma_scan_alpha_point_eight() {
    let out = run(&["gamma-scan", "--alpha", "0.8", "--steps", "50"]);
    assert!(out.status.success());
    for line in stdout_str(&out).lines().skip(1) {
        let cells: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(
            cells[1] >= cells[3] - 1e-9,
            "Gamma_FS < Gamma_SF^(2): {line}"
        );
    }
}

#[test]
fn gamma_scan_rejects_bad_alpha() {
    let out = run(&["gamma-scan", "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_prints_named_checks() {
    let out = run(&["verify", "--n-trials", "20", "--seed", "5"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["pass"].as_bool(), Some(true));
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "swap_qubit_state",
        "swap_qutrit_state",
        "chain_n3_state",
        "corollary2_measure_invariance",
        "obesity_prediction_qubit",
        "pauli_trace_identities",
        "result7_state_equality",
    ] {
        assert!(names.contains(&expected), "missing check {expected}");
    }
}

#[test]
fn verify_zero_trials_runs_identity_checks_only() {
    let out = run(&["verify", "--n-trials", "0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(
        checks[0]["name"].as_str().unwrap(),
        "pauli_trace_identities"
    );
}

#[test]
fn verify_injected_fault_exits_one_naming_the_check() {
    let out = run(&[
        "verify",
        "--n-trials",
        "5",
        "--inject-fault",
        "chain_n3_probability",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("chain_n3_probability"), "stderr: {err}");
}

#[test]
fn verify_unknown_fault_is_an_input_error() {
    let out = run(&["verify", "--n-trials", "1", "--inject-fault", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn state_file_in_bloch_form_accepted_everywhere() {
    let path = temp_path("werner.json");
    std::fs::write(
        &path,
        r#"{"d": 2, "R": [[1,0,0,0],[0,-0.9,0,0],[0,0,-0.9,0],[0,0,0,-0.9]]}"#,
    )
    .unwrap();
    let out = run(&["correlations", "--state", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!((v["B"].as_f64().unwrap() - 0.62).abs() <= 1e-9);

    let swap_out = run(&[
        "swap",
        "--ab",
        path.to_str().unwrap(),
        "--cd",
        "bell:0",
        "--effect",
        "0",
    ]);
    assert!(swap_out.status.success());
    std::fs::remove_file(&path).ok();
}

#[test]
fn effect_from_file() {
    // The identity-effect R matrix diag(1, 0, 0, 0): the swap then returns
    // the product of the marginals with probability 1.
    let path = temp_path("effect.json");
    std::fs::write(
        &path,
        r#"{"d": 2, "R": [[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#,
    )
    .unwrap();
    let out = run(&[
        "swap",
        "--ab",
        "werner:0.8",
        "--cd",
        "werner:0.8",
        "--effect",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!((v["probability"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    std::fs::remove_file(&path).ok();
}

#[test]
fn qutrit_swap_from_files() {
    // Maximally entangled two-qutrit state |psi> = sum_k |kk>/sqrt(3), used
    // both as the sources and (as a projector) the effect: the outcome
    // probability is 1/d^2 = 1/9 and the post-swap state is again maximally
    // entangled (obesity 1). The qubit-only measure report is omitted.
    let dim = 9usize;
    let amp = 1.0 / 3.0_f64.sqrt();
    let mut psi = vec![0.0; dim];
    for k in 0..3 {
        psi[k * 3 + k] = amp;
    }
    let rho: Vec<Vec<[f64; 2]>> = (0..dim)
        .map(|i| (0..dim).map(|j| [psi[i] * psi[j], 0.0]).collect())
        .collect();
    let op = serde_json::json!({"d": 3, "rho": rho});
    let path = temp_path("qutrit.json");
    std::fs::write(&path, serde_json::to_string(&op).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["swap", "--ab", p, "--cd", p, "--effect", p]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(v["d"].as_u64().unwrap(), 3);
    assert!((v["probability"].as_f64().unwrap() - 1.0 / 9.0).abs() <= 1e-12);
    assert!((v["obesity"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    assert!(v.get("report").is_none());
    std::fs::remove_file(&path).ok();
}

#[test]
fn qubit_swap_includes_report() {
    let out = run(&[
        "swap",
        "--ab",
        "werner:0.9",
        "--cd",
        "bell:1",
        "--effect",
        "1",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(v.get("report").is_some());
    // Bell-combo swap preserves the Werner measures.
    assert!((v["report"]["B"].as_f64().unwrap() - 0.62).abs() <= 1e-10);
    assert!((v["probability"].as_f64().unwrap() - 0.25).abs() <= 1e-12);
}
