use std::path::Path;
use std::process::{Command, Output};

fn synthpipe(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synthpipe"))
        .args(args)
        .current_dir(dir)
        .env("SYNTHPIPE_THREADS", "1")
        .output()
        .expect("spawn synthpipe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(dir: &Path) {
    std::fs::write(
        dir.join("sensitive.tsv"),
        format!("A\tB\tC\n{}{}", "1\t1\t0\n".repeat(10), "1\t0\t1\n".repeat(2)),
    )
    .unwrap();
    std::fs::write(dir.join("config.json"), r#"{"input_path": "sensitive.tsv", "output_dir": "out"}"#).unwrap();
}

#[test]
fn run_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let out = synthpipe(&["run", "--config", "config.json"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("12 sensitive records -> "), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 leaked"));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    for f in manifest["files"].as_array().unwrap() {
        assert!(dir.path().join("out").join(f["name"].as_str().unwrap()).is_file());
    }
    // Protected singleton counts: A 12 -> 10, B 10, C 2 -> withheld.
    let synthetic = std::fs::read_to_string(dir.path().join("out/synthetic_microdata.tsv")).unwrap();
    let rows: Vec<Vec<&str>> = synthetic.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.iter().filter(|r| r[0] == "1").count(), 10);
    assert_eq!(rows.iter().filter(|r| r[1] == "1").count(), 10);
    assert!(rows.iter().all(|r| r[2].is_empty()));
}

#[test]
fn overrides_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let out = synthpipe(
        &["run", "--config", "config.json", "--k", "2", "--p", "1", "--len", "2", "--mode", "unseeded", "--seed", "9", "--output-dir", "o2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("o2/manifest.json")).unwrap()).unwrap();
    assert_eq!(
        manifest["parameters"],
        serde_json::json!({"k": 2, "p": 1, "reporting_length": 2, "mode": "unseeded", "rng_seed": 9})
    );
}

#[test]
fn evaluate_reports_planted_leak() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    std::fs::write(dir.path().join("adversarial.tsv"), "A\tB\tC\n1\t1\t0\n1\t0\t1\n").unwrap();
    let out = synthpipe(
        &["evaluate", "--sensitive", "sensitive.tsv", "--synthetic", "adversarial.tsv", "--k", "10", "--len", "2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2\t2\t1\n"), "{text}");
    assert!(text.contains("total leaked combinations: 2"), "{text}");
}

#[test]
fn invalid_config_exits_two_naming_field() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let out = synthpipe(&["run", "--config", "config.json", "--p", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("reporting_precision"), "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let out = synthpipe(&["run", "--config", "config.json", "--input", "nope.tsv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("[read]"), "{}", stderr(&out));
}

#[test]
fn generate_then_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = synthpipe(&["generate", "--records", "600", "--columns", "12", "--seed", "4", "--output", "bench.tsv"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    std::fs::write(dir.path().join("c.json"), r#"{"input_path": "bench.tsv", "k": 5}"#).unwrap();
    for o in ["r1", "r2"] {
        let out = Command::new(env!("CARGO_BIN_EXE_synthpipe"))
            .args(["run", "--config", "c.json", "--output-dir", o])
            .current_dir(dir.path())
            .env("SOURCE_DATE_EPOCH", "0")
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for entry in std::fs::read_dir(dir.path().join("r1")).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(
            std::fs::read(dir.path().join("r1").join(&name)).unwrap(),
            std::fs::read(dir.path().join("r2").join(&name)).unwrap(),
            "{name:?}"
        );
    }
}
