use std::path::Path;
use std::process::{Command, Output};

fn glradial(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glradial"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .arg("--cache")
        .arg(dir.join("cache"))
        .env_remove("GLRADIAL_CACHE")
        .output()
        .expect("binary runs")
}

fn summary(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stdout);
    let last = text.lines().last().expect("summary line");
    serde_json::from_str(last).expect("summary is JSON")
}

#[test]
fn profile_cache_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let first = glradial(tmp.path(), &["profile", "--d", "1"]);
    assert!(first.status.success());
    let csv = tmp.path().join("out/profile/profile_d1.csv");
    let a = std::fs::read(&csv).unwrap();
    let second = glradial(tmp.path(), &["profile", "--d", "1"]);
    assert_eq!(summary(&first)["cache_hit"], false);
    assert_eq!(summary(&second)["cache_hit"], true);
    assert_eq!(a, std::fs::read(&csv).unwrap());
    assert!(tmp.path().join("out/profile/manifest.json").exists());
}

#[test]
fn scan_finds_the_exact_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let o = glradial(tmp.path(), &["scan", "--d", "1", "--n-min", "0.9", "--n-max", "1.1", "--n-step", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let roots = summary(&o)["roots"].as_array().unwrap().clone();
    assert_eq!(roots.len(), 1);
    assert!((roots[0]["n"].as_f64().unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn verify_payload_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "verify", "--d-list", "1", "--n-step", "0.1", "--epsilons", "0.1,0.05", "--set", "mesh_density=100", "--set",
        "rerun=false",
    ];
    let a = glradial(tmp.path(), &args);
    let payload = tmp.path().join("out/verify/payload.csv");
    let first = std::fs::read(&payload).unwrap();
    let b = glradial(tmp.path(), &args);
    assert_eq!(a.status.code(), b.status.code());
    assert!(matches!(a.status.code(), Some(0 | 2)));
    assert_eq!(first, std::fs::read(&payload).unwrap());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/verify/report.json")).unwrap()).unwrap();
    assert_eq!(report["criteria"].as_array().unwrap().len(), 8);
}

#[test]
fn bad_input_reports_json_and_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let o = glradial(tmp.path(), &["eig", "--epsilon=-1"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["status"], "error");
    assert!(tmp.path().join("out/error.json").exists());
}
