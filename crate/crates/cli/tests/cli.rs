//! End-to-end tests of the `ocsym` binary: report content, exit codes,
//! JSON schema, and determinism across runs and thread counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn problem_path(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../problems");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn ocsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocsym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = ocsym(args);
    assert!(
        out.status.success(),
        "ocsym {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn symmetry_scalar_with_gauge_reports_five_constants() {
    let text = stdout_of(&["symmetry", &problem_path("scalar_quadratic.ocp"), "--gauge"]);
    assert!(text.contains("family: 5 free constant(s)"), "{}", text);
    assert!(text.contains("config: D3, degree 2, additive, gauge on"));
}

#[test]
fn symmetry_sr2358_reports_nine_constants() {
    let text = stdout_of(&["symmetry", &problem_path("sr2358.ocp")]);
    assert!(text.contains("family: 9 free constant(s)"), "{}", text);
}

#[test]
fn noether_sr2358_lists_the_eight_integrals() {
    let text = stdout_of(&["noether", &problem_path("sr2358.ocp"), "--all-independent"]);
    for law in [
        "psi3 = const",
        "psi4 = const",
        "psi5 = const",
        "psi6 = const",
        "psi7 = const",
        "psi8 = const",
        "x3*psi5 + x4*psi7 + x5*psi8 + psi2 = const",
        "H = const",
    ] {
        assert!(text.contains(law), "missing `{}` in:\n{}", law, text);
    }
}

#[test]
fn noether_verify_reports_zero_residuals() {
    let text = stdout_of(&[
        "noether",
        &problem_path("scalar_quadratic.ocp"),
        "--gauge",
        "--verify",
    ]);
    assert!(text.contains("general: residual = 0"), "{}", text);
}

#[test]
fn pmp_prints_hamiltonian_and_system() {
    let text = stdout_of(&["pmp", &problem_path("scalar_quadratic.ocp"), "--evalH"]);
    assert!(text.contains("H = -u^2 + u*psi1"), "{}", text);

    let text = stdout_of(&["pmp", &problem_path("forced_oscillator.ocp"), "--system"]);
    assert!(text.contains("q' = v"));
    assert!(text.contains("v' = u"));
    assert!(text.contains("psi2' = v*a - psi1"));
    assert!(text.contains("-u + psi2 = 0"));

    let text = stdout_of(&["pmp", &problem_path("sr2358.ocp"), "--controls"]);
    assert!(text.contains("u1 = psi1"), "{}", text);
    assert!(text.contains("u2 = "));
}

#[test]
fn input_errors_exit_2() {
    let missing = ocsym(&["pmp", "/nonexistent/problem.ocp"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = std::env::temp_dir().join("ocsym_cli_tests");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.ocp");
    std::fs::write(
        &bad,
        "states: x1\ncontrols: u1\nlagrangian: x1 +\nphi: u1\n",
    )
    .unwrap();
    let out = ocsym(&["pmp", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("syntax error"), "{}", err);
}

#[test]
fn degenerate_controls_exit_3() {
    let out = ocsym(&[
        "pmp",
        &problem_path("scalar_quadratic.ocp"),
        "--mode",
        "abnormal",
        "--controls",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not uniquely solvable"), "{}", err);
}

#[test]
fn json_report_has_versioned_schema() {
    let text = stdout_of(&[
        "noether",
        &problem_path("sr2358.ocp"),
        "--spec",
        "C8=1",
        "--json",
    ]);
    let json: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    assert_eq!(json["schema"].as_u64(), Some(1));
    assert_eq!(json["family"]["constants"].as_u64(), Some(9));
    assert_eq!(json["problem"]["states"].as_u64(), Some(8));
    assert!(json["duration_ms"].is_u64());
    let specialized = json["laws"]["specialized"][0]["law"]["algebraic"]
        .as_str()
        .unwrap();
    assert_eq!(specialized, "x3*psi5 + x4*psi7 + x5*psi8 + psi2");
}

#[test]
fn reports_are_deterministic_across_runs_and_threads() {
    let args = ["symmetry", &problem_path("sr235.ocp"), "--dep", "D2"];
    let first = stdout_of(&args);
    let second = stdout_of(&args);
    assert_eq!(first, second, "identical runs must be byte-identical");

    for threads in ["1", "3", "8"] {
        let out = Command::new(env!("CARGO_BIN_EXE_ocsym"))
            .args(args)
            .env("OCSYM_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(out.status.success());
        assert_eq!(
            String::from_utf8(out.stdout).unwrap(),
            first,
            "OCSYM_THREADS={} changed the report",
            threads
        );
    }
}

#[test]
fn dependence_and_degree_flags_are_validated() {
    let out = ocsym(&["symmetry", &problem_path("sr23.ocp"), "--dep", "D9"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ocsym(&["symmetry", &problem_path("sr23.ocp"), "--degree", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pmp_default_prints_hamiltonian_and_system() {
    let text = stdout_of(&["pmp", &problem_path("scalar_quadratic.ocp")]);
    assert!(text.contains("H = -u^2 + u*psi1"));
    assert!(text.contains("state equations:"));
    assert!(text.contains("x' = u"));
    assert!(text.contains("stationary conditions:"));
    // controls are only solved on request
    assert!(!text.contains("extremal controls:"));
}

#[test]
fn ansatz_flags_reach_the_solver() {
    let text = stdout_of(&[
        "symmetry",
        &problem_path("sr23.ocp"),
        "--dep",
        "D4",
        "--degree",
        "1",
        "--dense",
    ]);
    assert!(
        text.contains("config: D4, degree 1, dense, gauge off"),
        "{}",
        text
    );
    assert!(text.contains("family: 5 free constant(s)"), "{}", text);
}

#[test]
fn mode_override_is_reported() {
    let text = stdout_of(&[
        "pmp",
        &problem_path("scalar_quadratic.ocp"),
        "--mode",
        "abnormal",
        "--evalH",
    ]);
    assert!(text.contains("mode=abnormal"));
    assert!(text.contains("H = u*psi1"), "{}", text);
}
