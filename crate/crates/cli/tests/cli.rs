use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blindfactor"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn blindfactor")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn build_circuit(dir: &Path, t: usize) -> std::path::PathBuf {
    let out = dir.join(format!("c{t}.json"));
    let output = run(&[
        "build", "--N", "21", "--a", "4", "--t", &t.to_string(), "--L", "3", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    out
}

#[test]
fn build_writes_circuit_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = build_circuit(dir.path(), 2);
    let circuit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(circuit["n"], 5);
    assert_eq!(circuit["t"], 2);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c2.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "build");
    assert_eq!(manifest["flags"]["N"], 21);
    assert_eq!(manifest["schema_version"], 1);
}

#[test]
fn build_rejects_overflowing_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.json");
    let output = run(&[
        "build", "--N", "21", "--a", "2", "--t", "2", "--L", "2", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    // ord(2) mod 21 is 6, which does not fit in 2^2 codewords.
    assert!(stderr(&output).contains('6'), "{}", stderr(&output));
    assert!(!out.exists());
    let never = dir.path().join("never2.json");
    // a=7 shares a factor with 21, which the builder rejects first.
    let output = run(&[
        "build", "--N", "21", "--a", "7", "--t", "2", "--L", "2", "--out",
        never.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("gcd"), "{}", stderr(&output));
}

#[test]
fn build_rejects_non_coprime_base() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "build", "--N", "21", "--a", "6", "--t", "2", "--L", "3", "--out",
        dir.path().join("x.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn simulate_first_register_t2() {
    let dir = tempfile::tempdir().unwrap();
    let out = build_circuit(dir.path(), 2);
    let output = run(&["simulate", "--in", out.to_str().unwrap()]);
    assert!(output.status.success());
    let lines: Vec<String> = stdout(&output).lines().map(String::from).collect();
    assert_eq!(lines[0], "outcome,probability");
    assert_eq!(lines.len(), 5);
    for (row, expect) in lines[1..].iter().zip([0.375, 0.25, 0.125, 0.25]) {
        let p: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((p - expect).abs() < 1e-10, "{row}");
    }
}

#[test]
fn simulate_all_register_t3_peak() {
    let dir = tempfile::tempdir().unwrap();
    let out = build_circuit(dir.path(), 3);
    let output = run(&[
        "simulate", "--in", out.to_str().unwrap(), "--register", "first",
    ]);
    let body = stdout(&output);
    let p011: f64 = body
        .lines()
        .find(|l| l.starts_with("011,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((p011 - 0.2355).abs() < 1e-3);
}

#[test]
fn partition_reports_non_clifford_census() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = build_circuit(dir.path(), 2);
    let (a, b, report) = (
        dir.path().join("a.json"),
        dir.path().join("b.json"),
        dir.path().join("report.json"),
    );
    let output = run(&[
        "partition", "--in", circuit.to_str().unwrap(), "--out-a", a.to_str().unwrap(),
        "--out-b", b.to_str().unwrap(), "--report", report.to_str().unwrap(),
        "--N", "21", "--a", "4",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["census_a"]["non_clifford"], 0);
    assert_eq!(report["census_b"]["non_clifford"], 3);
    assert_eq!(report["d_star_greater"], 5);
    assert_eq!(report["max_dep"], 3072);
    assert!(a.exists() && b.exists());
}

#[test]
fn partition_rejects_malformed_json() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3,").unwrap();
    let output = run(&[
        "partition", "--in", bad.to_str().unwrap(),
        "--out-a", dir.path().join("a.json").to_str().unwrap(),
        "--out-b", dir.path().join("b.json").to_str().unwrap(),
        "--report", dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!stderr(&output).is_empty());
}

#[test]
fn protocol_honest_t2_factors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("transcript.json");
    let output = run(&[
        "protocol", "--N", "21", "--a", "4", "--t", "2", "--L", "3", "--seed", "5",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert!(stdout(&output).contains("factors 3 x 7"));
    let transcript: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(transcript["verdict"]["kind"], "factors");
}

#[test]
fn protocol_transcripts_reproduce_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (first, second) = (dir.path().join("t1.json"), dir.path().join("t2.json"));
    for out in [&first, &second] {
        let output = run(&[
            "protocol", "--N", "21", "--a", "4", "--t", "2", "--L", "3", "--seed", "42",
            "--out", out.to_str().unwrap(),
        ]);
        assert!(output.status.success());
    }
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn protocol_flags_classical_server_a() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("transcript.json");
    let output = run(&[
        "protocol", "--N", "21", "--a", "4", "--t", "2", "--L", "3", "--seed", "3",
        "--adversary-a", "chsh-classical", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("dishonest(A)"));
}

#[test]
fn protocol_zero_rounds_exhausts() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "protocol", "--N", "21", "--a", "4", "--t", "2", "--L", "3", "--max-rounds", "0",
        "--out", dir.path().join("t.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("exhausted"));
}

#[test]
fn protocol_rejects_unknown_adversary() {
    let dir = tempfile::tempdir().unwrap();
    let output = run(&[
        "protocol", "--N", "21", "--a", "4", "--t", "2", "--L", "3",
        "--adversary-a", "quantum", "--out", dir.path().join("t.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn enumerate_eight_qubits() {
    let output = run(&["enumerate", "--n", "8"]);
    assert!(output.status.success());
    let body = stdout(&output);
    assert!(body.contains("s' = 1133233"), "{body}");
    assert!(body.contains("bitstring_size_bound_bits"));
}

#[test]
fn postprocess_direct_and_heuristic() {
    let output = run(&["postprocess", "--y", "3", "--t", "3", "--N", "21", "--a", "4"]);
    assert!(output.status.success());
    let body = stdout(&output);
    assert!(body.contains("r = 3") && body.contains("factors: 3 x 7"), "{body}");

    let output = run(&["postprocess", "--y", "1", "--t", "2", "--N", "21", "--a", "4"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("no valid period"));

    let output = run(&[
        "postprocess", "--y", "1", "--t", "2", "--N", "21", "--a", "4", "--heuristic",
    ]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("r = 3"));
}

#[test]
fn seed_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let output = bin()
        .env("BLINDFACTOR_SEED", "42")
        .args([
            "protocol", "--N", "21", "--a", "4", "--t", "2", "--L", "3",
            "--out", out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let transcript: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(transcript["config"]["seed"], 42);
}

#[test]
fn version_names_schema() {
    let output = run(&["--version"]);
    assert!(output.status.success());
    assert!(stdout(&output).contains("schema"));
}
