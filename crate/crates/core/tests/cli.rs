use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_graded-norms"));
    c.env("GRADED_NORMS_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn load(name: &str) -> Value {
    let text = std::fs::read_to_string(schema_dir().join(format!("{name}.schema.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn validate(schema: &str, instance: &Value) {
    let registry = jsonschema::Registry::new()
        .add("urn:graded-norms:norm_spec", load("norm_spec"))
        .unwrap()
        .prepare()
        .unwrap();
    let validator = jsonschema::options().with_registry(&registry).build(&load(schema)).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}\n{instance:#}");
}

fn json_of(args: &[&str]) -> (i32, Value) {
    let o = run(args);
    (o.status.code().unwrap(), serde_json::from_str(&stdout(&o)).expect("json output"))
}

#[test]
fn l0_prints_two() {
    let o = run(&["l0", "--source", "lp:2", "--x", "[0,3,0,-1]"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "2\n");
}

#[test]
fn sequence_of_l1() {
    let (code, v) = json_of(&["sequence", "--source", "lp:1", "--x", "[3,-1,2]", "--format", "json"]);
    assert_eq!(code, 0);
    assert_eq!(v["topk"], serde_json::json!([3.0, 5.0, 6.0]));
    validate("sequence_report", &v);
}

#[test]
fn osm_falsified_for_max_norm() {
    let o = run(&["check", "osm", "--source", "lp:inf", "--trials", "1000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("falsified") && text.contains("witness"), "{text}");
}

#[test]
fn exit_codes_for_bad_input() {
    for args in [
        &["eval", "--source", "lq:2", "--x", "[1]"][..],
        &["topk", "--source", "lp:2", "--x", "[1,2]", "--k", "0"],
        &["topk", "--source", "lp:2", "--x", "[1,nan]", "--k", "1"],
        &["eval", "--source", "wlp:1:[1,2]", "--x", "[1,2,3]"],
        &["ksupport", "--source", "lp:2", "--x", "[1,2]", "--k", "1", "--method", "analytic"],
        &["eval", "--x", "[1]"],
        &["eval", "--source", "lp:2", "--x", "[1]", "--tol", "0"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let cases: [&[&str]; 3] = [
        &["check", "om", "--source", "atomic:[[2,1],[1,2]]", "--trials", "300", "--format", "json"],
        &["check", "gradedness", "--source", "lp:1", "--direction", "decreasing", "--strict", "--dim", "3", "--trials", "60", "--format", "json"],
        &["suite", "--quick", "--filter", "properties"],
    ];
    for args in cases {
        let a = run(args);
        let b = bin().env("GRADED_NORMS_THREADS", "1").args(args).output().unwrap();
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn reports_validate_against_schemas() {
    let (_, v) = json_of(&["eval", "--source", "wlp:2:[1,2]", "--x", "[3,-1]", "--format", "json"]);
    validate("value_report", &v);
    let (_, v) = json_of(&["ksupport", "--source", "lp:inf", "--k", "2", "--x", "[3,-1]", "--format", "json"]);
    validate("value_report", &v);
    let (_, v) = json_of(&["l0", "--source", "lp:1", "--x", "[0.25,0.25,1]", "--format", "json"]);
    validate("l0_report", &v);
    assert_eq!(v["l0_ksupport"], 2);
    let (_, v) = json_of(&["l0", "--source", "atomic:[[1,0],[1,1]]", "--x", "[1,2]", "--format", "json"]);
    validate("l0_report", &v);
    let (code, v) = json_of(&["check", "osm", "--source", "lp:inf", "--trials", "200", "--format", "json"]);
    assert_eq!(code, 1);
    validate("property_report", &v);
    let (code, v) = json_of(&["check", "om", "--source", "lp:2", "--trials", "200", "--format", "json"]);
    assert_eq!(code, 0);
    validate("property_report", &v);
    let (_, v) = json_of(&["check", "birkhoff", "--source", "lp:2", "--set", "[1,2]", "--strict", "--trials", "100", "--format", "json"]);
    validate("property_report", &v);
    let (_, v) = json_of(&["check", "sphere-identity", "--source", "lp:1", "--k", "2", "--dim", "3", "--trials", "100", "--format", "json"]);
    validate("property_report", &v);
    let (code, v) = json_of(&["check", "gradedness", "--source", "lp:inf", "--strict", "--dim", "3", "--trials", "40", "--format", "json"]);
    assert_eq!(code, 1);
    validate("gradedness_report", &v);
    let (code, v) = json_of(&["suite", "--quick", "--filter", "gradedness"]);
    assert_eq!(code, 0);
    validate("suite_bundle", &v);
    let ids: Vec<u64> = v["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![3, 5, 6]);
}

#[test]
fn example_specs_validate() {
    let spec = load("norm_spec");
    let validator = jsonschema::validator_for(&spec).unwrap();
    for good in [
        r#"{"kind":"lp","p":2.0}"#,
        r#"{"kind":"lp","p":"inf"}"#,
        r#"{"kind":"weighted_lp","p":1.0,"w":[1.0,2.0,3.0]}"#,
        r#"{"kind":"atomic","atoms":[[1.0,1.0],[1.0,-1.0]]}"#,
    ] {
        let v: Value = serde_json::from_str(good).unwrap();
        assert!(validator.is_valid(&v), "{good}");
        let parsed: graded_norms::NormSpec = serde_json::from_value(v).unwrap();
        let written = serde_json::to_value(&parsed).unwrap();
        assert!(validator.is_valid(&written));
        let again: graded_norms::NormSpec = serde_json::from_value(written).unwrap();
        assert_eq!(again, parsed);
    }
    for bad in [r#"{"kind":"lp"}"#, r#"{"kind":"lp","p":0.5}"#, r#"{"kind":"hexagon"}"#] {
        assert!(!validator.is_valid(&serde_json::from_str(bad).unwrap()), "{bad}");
    }
}

#[test]
fn file_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    std::fs::write(&csv, "# two vectors\n3, -1, 2\n0, 0, 1\n").unwrap();
    let o = run(&["topk", "--source", "lp:1", "--k", "2", "--input", csv.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "x,k,value\n\"[3.0,-1.0,2.0]\",2,5\n\"[0.0,0.0,1.0]\",2,1\n");

    let json = dir.path().join("x.json");
    std::fs::write(&json, "[[1,2],[0,-4]]").unwrap();
    let (_, v) = json_of(&["eval", "--source", "lp:inf", "--input", json.to_str().unwrap(), "--format", "json"]);
    let values: Vec<f64> = v.as_array().unwrap().iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert_eq!(values, vec![2.0, 4.0]);

    let atoms = dir.path().join("hexagon.json");
    std::fs::write(&atoms, "[[1,1],[1,-1],[0,2]]").unwrap();
    let source = format!("atomic:@{}", atoms.display());
    let o = run(&["eval", "--source", &source, "--x", "[1,0]"]);
    assert_eq!(stdout(&o), "1\n");

    let broken = dir.path().join("broken.csv");
    std::fs::write(&broken, "1,2\n3,x\n").unwrap();
    assert_eq!(run(&["eval", "--source", "lp:2", "--input", broken.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn suite_writes_bundle_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bundle.json");
    let o = run(&["suite", "--quick", "--filter", "6", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    validate("suite_bundle", &v);
    assert_eq!(v["passed"], true);
}
