use std::path::Path;
use std::process::Command;

use serde_json::Value;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_darboux2l"));
    cmd.args(args).env_remove("DARBOUX2L_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Output {
    run_with_env(args, &[])
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = run(&full);
    (out.code, serde_json::from_str(&out.stdout).expect("json output"))
}

fn column(doc: &Value, name: &str) -> Vec<f64> {
    let table = &doc["table"];
    let k = table["columns"].as_array().unwrap().iter().position(|c| c == name).expect("column");
    table["rows"].as_array().unwrap().iter().map(|r| r[k].as_f64().unwrap()).collect()
}

#[test]
fn first_family_peak_is_two() {
    let out = run(&["potential", "--family", "case1", "--R0", "1", "--c0", "0", "--gamma0", "0", "--t", "-3:3:601"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header, ["t", "f"]);
    assert_eq!(rows.len(), 601);
    let zero = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == 0.0).expect("t = 0 row");
    assert_eq!(zero[1], "2.0000000000000000e0");
}

#[test]
fn second_family_preset_passes() {
    let out = run(&["verify", "--preset", "case2", "--R0", "1", "--R1", "2", "--c0", "0.3"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header[0], "check_name");
    let passed = header.iter().position(|h| h == "passed").unwrap();
    assert!(rows.len() >= 8);
    assert!(rows.iter().all(|r| r[passed] == "true"));
}

#[test]
fn every_preset_passes_and_its_negative_control_fails() {
    let presets: [&[&str]; 3] = [
        &["--preset", "case1", "--R0", "1", "--c0", "0.3", "--gamma0", "0.2"],
        &["--preset", "case2", "--R0", "1", "--R1", "2", "--c0", "0.3", "--gamma0", "0.1", "--gamma1", "-0.2"],
        &["--preset", "case3", "--r0", "0.8", "--r1", "0.3", "--T", "1.4", "--R", "2.5", "--p", "1.7"],
    ];
    for preset in presets {
        let args: Vec<&str> = std::iter::once("verify").chain(preset.iter().copied()).collect();
        let (code, doc) = json(&args);
        assert_eq!(code, 0, "{preset:?}");
        assert_eq!(doc["passed"], true);

        let mut negative = args.clone();
        negative.push("--negative-control");
        let (code, doc) = json(&negative);
        assert_eq!(code, 1, "{preset:?}");
        let controls: Vec<&Value> = doc["reports"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["check_name"].as_str().unwrap().starts_with("negative/"))
            .collect();
        assert!(!controls.is_empty());
        assert!(controls.iter().all(|r| r["passed"] == false), "{preset:?}");
    }
}

#[test]
fn seed_negative_control_fails() {
    let args = ["seed", "--family", "tanh", "--r0", "1", "--r1", "0", "--T", "1", "--R", "2", "--p", "1"];
    assert_eq!(run(&args).code, 0);
    let mut bad = args.to_vec();
    bad.push("--negative-control");
    let out = run(&bad);
    assert_eq!(out.code, 1);
    let err: Value = serde_json::from_str(out.stderr.lines().last().unwrap()).unwrap();
    assert_eq!(err["error"], "check_failed");
}

#[test]
fn seed_table_columns() {
    let out = run(&["seed", "--family", "constant", "--c0", "0.3", "--eps", "0.8-1i", "--t", "0:1:11"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let (header, rows) = csv_rows(&out.stdout);
    assert_eq!(header, ["t", "re_psi1", "im_psi1", "re_psi2", "im_psi2"]);
    assert_eq!(rows.len(), 11);
    assert!(!out.stdout.contains('\r'));
    // report summary goes to stderr in csv mode
    assert!(out.stderr.starts_with("check_name,"));
}

#[test]
fn usage_errors_exit_2_with_structured_message() {
    let cases: [&[&str]; 8] = [
        &[],
        &["potential", "--bogus", "1"],
        &["potential", "--family", "case9"],
        &["potential", "--family", "case1", "--R0", "1"],
        &["potential", "--family", "constant", "--c0", "1", "--t", "-1:1:3"],
        &["seed", "--family", "constant", "--c0", "1", "--eps", "1,2"],
        &["verify", "--preset", "case1", "--R0", "1", "--c0", "1"],
        &["chain", "--seed", "constant", "--c0", "0.3", "--radii", "1,2", "--constants", "0"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        let first: Value = serde_json::from_str(out.stderr.lines().next().unwrap()).expect("json on stderr");
        assert!(first["error"] == "usage" || first["error"] == "computation", "{args:?}");
        assert!(!first["message"].as_str().unwrap().is_empty());
    }
    let out = run(&["potential", "--bogus", "1"]);
    assert!(out.stderr.contains("--bogus"));
}

#[test]
fn config_file_with_overriding_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "family = \"case1\"\nR0 = 1.0\nc0 = 0.0\nt = \"-1:1:9\"\nformat = \"json\"\n").unwrap();
    let config = path.to_str().unwrap();

    let (code, doc) = json(&["potential", "--config", config]);
    assert_eq!(code, 0);
    assert_eq!(column(&doc, "f")[4], 2.0);

    let (code, doc) = json(&["potential", "--config", config, "--R0", "2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["parameters"]["R0"], 2.0);
    assert_eq!(column(&doc, "f")[4], 4.0);

    std::fs::write(&path, "family = \"case1\"\nR0 = 1.0\nc0 = 0.0\nbogus = 1\n").unwrap();
    let out = run(&["potential", "--config", config]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("bogus"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.json"), dir.path().join("b.json")];
    for p in &paths {
        let out = run(&[
            "transform", "--family", "case3", "--r0", "0.8", "--r1", "0.3", "--T", "1.4", "--R", "2.5", "--p", "1.7",
            "--eps", "0.5,1", "--t", "-2:2:801", "--format", "json", "--output", p.to_str().unwrap(),
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.is_empty());
    }
    let (a, b) = (std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn tolerance_from_environment() {
    let args = ["seed", "--family", "constant", "--c0", "0.3", "--eps", "1", "--t", "-5:5:1001", "--format", "json"];
    let out = run_with_env(&args, &[("DARBOUX2L_TOL", "1e-3")]);
    assert_eq!(out.code, 1);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["tolerances"]["rel_tol"], 1e-3);
    let gap = doc["reports"].as_array().unwrap().iter().find(|r| r["check_name"] == "seed_integration_gap").unwrap();
    assert_eq!(gap["passed"], false);

    let mut tight = args.to_vec();
    tight.extend(["--rel-tol", "1e-11"]);
    assert_eq!(run_with_env(&tight, &[("DARBOUX2L_TOL", "1e-3")]).code, 0);
    assert_eq!(run_with_env(&args, &[("DARBOUX2L_TOL", "abc")]).code, 2);
}

#[test]
fn chain_reproduces_second_family() {
    let (code, chain) = json(&["chain", "--seed", "constant", "--c0", "0.3", "--radii", "1,2", "--constants", "0.1,-0.2", "--eps", "1"]);
    assert_eq!(code, 0);
    let (code, closed) = json(&[
        "potential", "--family", "case2", "--R0", "1", "--R1", "2", "--c0", "0.3", "--gamma0", "0.1", "--gamma1", "-0.2",
    ]);
    assert_eq!(code, 0);
    let (a, b) = (column(&chain, "f2"), column(&closed, "f"));
    assert_eq!(a.len(), b.len());
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-8, "gap {gap}");
}

#[test]
fn json_matches_schema() {
    let schema_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("valid schema");
    let runs: [&[&str]; 6] = [
        &["potential", "--family", "sech", "--r0", "1", "--T", "2", "--t", "-1:1:21"],
        &["seed", "--family", "tanh", "--r0", "0.8", "--r1", "0.3", "--T", "1.4", "--eps", "0.5", "--c2", "0.5-i", "--t", "-1:1:21"],
        &["transform", "--family", "case1", "--R0", "1", "--c0", "0.3", "--t", "-1:1:201"],
        &["chain", "--seed", "tanh", "--r0", "0.8", "--r1", "0.3", "--T", "1.4", "--radii", "2", "--t", "-1:1:401"],
        &["verify", "--preset", "case1", "--R0", "1", "--c0", "0.3", "--t", "-2:2:401"],
        &["verify", "--preset", "case1", "--R0", "1", "--c0", "0.3", "--t", "-2:2:401", "--negative-control"],
    ];
    for args in runs {
        let (_, doc) = json(args);
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
    let mut broken: Value = json(runs[0]).1;
    broken["reports"] = serde_json::json!([{"check_name": "x"}]);
    assert!(!validator.is_valid(&broken));
}
