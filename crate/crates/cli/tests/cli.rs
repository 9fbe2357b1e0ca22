use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use teleport_cli::ReportDocument;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_teleport"))
}

fn scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg(config).output().unwrap()
}

fn report(out: &Output) -> ReportDocument {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report: {e}\nstderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

const BELL2: &str = r#"{"n": 2, "family": "bell", "rho": {"random": 3}, "trials": 1000, "seed": 7}"#;

#[test]
fn verify_bell_two_succeeds_with_full_completeness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "bell.json", BELL2);
    let out = run(&["verify", "--quiet"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let rep = report(&out);
    assert!(rep.passed);
    assert!((rep.scheme.completeness - 1.0).abs() < 1e-12);
    assert_eq!(rep.scheme.entries.len(), 4);
    assert!(rep.protocol.is_none());
}

#[test]
fn verify_unbalanced_custom_vector_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (0.9f64.sqrt(), 0.1f64.sqrt());
    let body = format!(
        r#"{{"n": 2, "family": "custom", "rho": {{"random": 1}},
            "custom_xi": [{{"label": "t", "coefficients": [[[{a}, 0], [0, 0]], [[0, 0], [{b}, 0]]]}}]}}"#
    );
    let cfg = scenario(dir.path(), "custom.json", &body);
    let out = run(&["verify"], &cfg);
    assert_eq!(out.status.code(), Some(1));
    let rep = report(&out);
    assert!(!rep.verification.solvable);
    assert_eq!(rep.scheme.rejections.len(), 1);
    assert!(!rep.verification.linearity[0].is_linear);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn malformed_matrix_row_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = "{\n  \"n\": 2,\n  \"family\": \"maximal\",\n  \"rho\": [[[1, 0], [0, 0]],\n          [[0, 0]]]\n}\n";
    let cfg = scenario(dir.path(), "bad.json", body);
    let out = run(&["verify"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:"), "{err}");
    assert!(err.contains(":4:") || err.contains(":5:"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "bell.json", r#"{"n": 2, "family": "bell", "rho": {"random": 3}}"#);
    assert_eq!(run(&["run"], &cfg).status.code(), Some(2));
    assert_eq!(run(&["verify", "--tolerance", "-1"], &cfg).status.code(), Some(2));
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["verify"], &missing).status.code(), Some(2));
}

#[test]
fn run_bell_two_recovers_every_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "bell.json", BELL2);
    let out = run(&["run", "--quiet"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    let proto = report(&out).protocol.unwrap();
    assert_eq!(proto.trials, 1000);
    assert_eq!(proto.seed, 7);
    assert!((proto.mean_fidelity.unwrap() - 1.0).abs() <= 1e-9);
    assert_eq!(proto.unmeasured_count, 0);
}

#[test]
fn run_sign_family_leaves_three_quarters_unmeasured() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"n": 4, "family": "sign", "lambda": {"haar": 2}, "rho": {"random": 5}, "trials": 4000, "seed": 13}"#;
    let cfg = scenario(dir.path(), "sign.json", body);
    let out = run(&["run", "--quiet"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    let proto = report(&out).protocol.unwrap();
    let sigma = (0.75f64 * 0.25 / 4000.0).sqrt();
    assert!((proto.unmeasured_fraction() - 0.75).abs() < 5.0 * sigma);
    assert!((proto.unmeasured_probability - 0.75).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical_and_seed_override_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "bell.json", BELL2);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = run(&["run", "--quiet", "--out", out.to_str().unwrap()], &cfg);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);

    let rep: ReportDocument = serde_json::from_slice(&ja).unwrap();
    assert_eq!(serde_json::to_string_pretty(&rep).unwrap() + "\n", String::from_utf8(ja).unwrap());

    let o = run(&["run", "--quiet", "--seed", "99"], &cfg);
    assert_eq!(report(&o).protocol.unwrap().seed, 99);
}

#[test]
fn keys_for_bell_two_name_the_textbook_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "bell.json", BELL2);
    let out = run(&["keys", "--quiet"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for j in 1..=4 {
        assert!(text.contains(&format!("matches U{j} up to a global phase")), "{text}");
    }
    assert!(text.contains("1.0000000000000000e0"), "{text}");
}

#[test]
fn keys_for_maximal_identity_resource() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "max.json",
        r#"{"n": 3, "family": "maximal", "lambda": "identity", "rho": {"random": 0}}"#,
    );
    let out = run(&["keys", "--quiet"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("key maximal (success probability 1.11111111111111"), "{text}");
    let one = "[1.0000000000000000e0, 0.0000000000000000e0]";
    assert_eq!(text.matches(one).count(), 3, "{text}");
}

#[test]
fn keys_for_sign_family_include_shared_key_section() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "sign.json",
        r#"{"n": 2, "family": "sign", "lambda": {"haar": 1}, "rho": {"random": 0}}"#,
    );
    let out = run(&["keys", "--quiet"], &cfg);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("shared key conj(lambda)"), "{text}");
    assert!(text.contains("shared key recovers every outcome: false"), "{text}");
}
