//! Command-line behaviour: config/flag precedence, output containment,
//! validation failures.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ridk")
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{
            "experiment": "trace-scaling",
            "dim": 1,
            "sobolev_s": 0.55,
            "eps_values": [0.2, 0.1],
            "seed": 1
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = Command::new(bin())
        .args(["trace-scaling", "--config"])
        .arg(&config)
        .args(["--eps", "0.2,0.1,0.05", "--seed", "9", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    // flag list won over the file's two widths
    let rows = std::fs::read_to_string(out.join("rows.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4, "{rows}");
    // and the seed column carries the flag value
    assert!(rows.lines().nth(1).unwrap().starts_with("9,"));
    // the effective config is echoed into the summary
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"seed\": 9"));
}

#[test]
fn config_subcommand_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"experiment": "verify-appendix"}"#).unwrap();
    let output = Command::new(bin())
        .args(["trace-scaling", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("verify-appendix"), "{err}");
}

#[test]
fn invalid_configuration_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(bin())
        .args([
            "convergence",
            "--theta",
            "1.5",
            "--n",
            "1000",
            "--s",
            "0.55",
            "--out",
        ])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("theta"), "{err}");
}

#[test]
fn writes_stay_inside_the_output_directory() {
    let parent = tempfile::tempdir().unwrap();
    let out = parent.path().join("only-this");
    let status = Command::new(bin())
        .current_dir(parent.path())
        .args([
            "micro-scaling",
            "--n",
            "300",
            "--s",
            "0.55",
            "--replicas",
            "5",
            "--seed",
            "4",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let entries: Vec<String> = std::fs::read_dir(parent.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        entries,
        vec!["only-this".to_string()],
        "stray writes: {entries:?}"
    );
}

#[test]
fn spectrum_emits_eigenvalue_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = Command::new(bin())
        .args(["spectrum", "--eps", "0.2", "--s", "0.55", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows = std::fs::read_to_string(out.join("rows.csv")).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next().unwrap(), "seed,eps,j,lambda,weight");
    // j = 0 row: lambda = weight = 1
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[2], "0");
    assert_eq!(first[3], "1");
}
