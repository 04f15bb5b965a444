use std::process::Command;

use serde_json::Value;
use sobolev_lab::cli::run;

fn lab(args: &[&str]) -> sobolev_lab::cli::Outcome {
    run(std::iter::once("sobolev-lab").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> Value {
    let out = lab(args);
    assert!(out.code <= 1, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn constants_reports() {
    let out = lab(&["constants", "--n", "3", "--m", "4", "--p", "1.5"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("smaller than both"));

    let out = lab(&["constants", "--n", "3", "--p", "2", "--chain"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.matches("PASS  chain").count(), 2);

    let v = json(&[
        "constants",
        "--n",
        "3",
        "--m",
        "0",
        "--p",
        "2",
        "--format",
        "json",
    ]);
    let names: Vec<&str> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[0].as_str().unwrap())
        .collect();
    assert!(names.contains(&"aubin_talenti"));
    assert!(!names
        .iter()
        .any(|n| n.contains("tilde") || n.starts_with("k_")));
    assert!(v["notes"][0].as_str().unwrap().contains("suppressed"));

    let v = json(&[
        "constants",
        "--n",
        "4",
        "--m",
        "2",
        "--p",
        "3",
        "--t",
        "0.6",
        "--format",
        "json",
    ]);
    assert!(v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r[0] == "k_of_t"));
}

#[test]
fn json_is_reproducible_and_carries_config() {
    let args = [
        "verify",
        "alpha-sweep",
        "--format",
        "json",
        "--no-timestamp",
        "--js",
        "1,10",
    ];
    let a = lab(&args);
    let b = lab(&args);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v.get("timestamp_unix").is_none());
    assert_eq!(v["config"]["command"], "verify alpha-sweep");
    assert_eq!(
        v["config"]["parameters"]["Verify"]["suite"]["AlphaSweep"]["js"],
        serde_json::json!([1, 10])
    );
    assert_eq!(v["passed"], true);

    let v = json(&["verify", "alpha-sweep", "--format", "json", "--js", "1"]);
    assert!(v["timestamp_unix"].as_u64().unwrap() > 0);
}

#[test]
fn csv_and_output_file() {
    let out = lab(&[
        "verify",
        "quadrature-check",
        "--format",
        "csv",
        "--tuples",
        "3",
    ]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "case,closed_form,quadrature,relative_error");
    assert_eq!(lines.len(), 1 + 3 + 5);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let p = path.to_str().unwrap();
    let out = lab(&["verify", "identities", "--format", "json", "--output", p]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 6);
}

#[test]
fn config_file_prefills_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(
        &path,
        "# quotient run\nsurface = helicoid\nseeds=2\np = 1.8\nno_timestamp = true\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let v = json(&[
        "verify",
        "sobolev-quotient",
        "--config",
        p,
        "--format",
        "json",
        "--seed",
        "3",
    ]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "helicoid");
    assert_eq!(rows[0][3], 1.8);
    assert_eq!(rows[0][4], 3);
    assert!(v.get("timestamp_unix").is_none());

    let v = json(&[
        "verify",
        "sobolev-quotient",
        "--config",
        p,
        "--format",
        "json",
        "--seeds",
        "1",
    ]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);

    std::fs::write(&path, "surface helicoid\n").unwrap();
    assert_eq!(lab(&["verify", "sobolev-quotient", "--config", p]).code, 2);
}

#[test]
fn exit_codes() {
    assert_eq!(lab(&["constants", "--n", "3"]).code, 2);
    assert_eq!(lab(&["constants", "--n", "3", "--p", "5"]).code, 2);
    assert_eq!(
        lab(&["verify", "isoperimetric", "--surface", "torus"]).code,
        2
    );
    // S/AT increases when n is listed in decreasing order.
    let out = lab(&["asymptotics", "--ns", "1000,100", "--ps", "2"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("FAIL  S/AT decreasing"));
    assert_eq!(lab(&["--help"]).code, 0);
}

#[test]
fn binary_honours_seed_environment() {
    let bin = env!("CARGO_BIN_EXE_sobolev-lab");
    let args = [
        "verify",
        "quadrature-check",
        "--tuples",
        "2",
        "--format",
        "csv",
    ];
    let with_env = Command::new(bin)
        .args(args)
        .env("SOBOLEV_LAB_SEED", "99")
        .output()
        .unwrap();
    let explicit = Command::new(bin)
        .args(args)
        .args(["--seed", "99"])
        .env_remove("SOBOLEV_LAB_SEED")
        .output()
        .unwrap();
    let default = Command::new(bin)
        .args(args)
        .env_remove("SOBOLEV_LAB_SEED")
        .output()
        .unwrap();
    assert_eq!(with_env.status.code(), Some(0));
    assert_eq!(with_env.stdout, explicit.stdout);
    assert_ne!(with_env.stdout, default.stdout);

    let bad = Command::new(bin)
        .args(["verify", "nonsense"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}
