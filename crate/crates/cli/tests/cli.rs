use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SCHEMA: &str = include_str!("../schema/summary.schema.json");

fn fsmb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fsmb"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env_remove("FSMB_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path, experiment: &str) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{experiment}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// The subset of JSON Schema the published schema uses.
fn validate(schema: &Value, value: &Value, path: &str) -> Vec<String> {
    let mut errors = Vec::new();
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_u64() || value.is_i64(),
            "boolean" => value.is_boolean(),
            _ => false,
        };
        if !ok {
            return vec![format!("{path}: expected {t}, got {value}")];
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            errors.push(format!("{path}: {value} not in enum"));
        }
    }
    if let (Some(min), Some(v)) = (schema.get("minimum").and_then(Value::as_f64), value.as_f64()) {
        if v < min {
            errors.push(format!("{path}: {v} < {min}"));
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                errors.push(format!("{path}: missing {key}"));
            }
        }
        for (k, v) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => errors.extend(validate(sub, v, &format!("{path}.{k}"))),
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    errors.push(format!("{path}: unexpected key {k}"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            errors.extend(validate(items, v, &format!("{path}[{i}]")));
        }
    }
    errors
}

#[test]
fn selftest_on_default_config_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = fsmb(dir.path(), &["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let s = summary(dir.path(), "selftest");
    assert_eq!(s["pass"], Value::Bool(true));
    assert!(s["checks"].as_array().unwrap().len() >= 15);
}

#[test]
fn fair_coin_entropy_is_exact_ln2() {
    let dir = tempfile::tempdir().unwrap();
    assert!(fsmb(dir.path(), &["entropy"]).status.success());
    let s = summary(dir.path(), "entropy");
    assert_eq!(s["method"], "exact");
    assert_eq!(format!("{:.4}", s["estimate_nats"].as_f64().unwrap()), "0.6931");
    assert_eq!(s["stderr"].as_f64(), Some(0.0));
    assert_eq!(s["units"], "nats");
}

#[test]
fn bits_flag_converts_outputs_only() {
    let dir = tempfile::tempdir().unwrap();
    assert!(fsmb(dir.path(), &["entropy", "--bits"]).status.success());
    let s = summary(dir.path(), "entropy");
    assert_eq!(s["units"], "bits");
    assert!((s["estimate"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((s["estimate_nats"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
}

#[test]
fn cesaro_check_at_six_is_tight() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("parity.toml");
    std::fs::write(
        &config,
        "[model]\nkind = \"bernoulli\"\nrank = 2\nprobabilities = [0.3, 0.7]\n\
         [partition]\nwindow = [\"\", \"ab\"]\nlabeling = \"parity\"\n[run]\nsamples = 10\n",
    )
    .unwrap();
    for args in [&["cesaro-check", "--n", "6"][..], &["cesaro-check", "--n", "6", "--config", config.to_str().unwrap()]]
    {
        assert!(fsmb(dir.path(), args).status.success());
        let d = summary(dir.path(), "cesaro-check")["max_discrepancy"].as_f64().unwrap();
        assert!(d <= 1e-9, "{d}");
    }
}

#[test]
fn single_worker_csv_is_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["info-seq", "--seed", "7", "--samples", "20", "--n", "30", "--method", "pointwise-monte-carlo"];
    assert!(fsmb(a.path(), &args).status.success());
    assert!(fsmb(b.path(), &args).status.success());
    let read = |d: &Path| std::fs::read(d.join("info-seq.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    let text = String::from_utf8(read(a.path())).unwrap();
    assert_eq!(text.lines().next(), Some("experiment,seed,sample_id,n,value,method"));
    assert_eq!(text.lines().count(), 1 + 20 * 31);
}

#[test]
fn worker_count_does_not_change_values() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["maximal-check", "--samples", "40", "--n", "10"];
    assert!(fsmb(a.path(), &args).status.success());
    let mut parallel = args.to_vec();
    parallel.extend(["--workers", "3"]);
    assert!(fsmb(b.path(), &parallel).status.success());
    let read = |d: &Path| std::fs::read(d.join("maximal-check.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn summaries_validate_against_schema() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let walk = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/biased-walk.toml");
    let runs: [&[&str]; 9] = [
        &["info-seq", "--n", "10", "--samples", "5"],
        &["entropy", "--bits"],
        &["cesaro-check", "--n", "3", "--samples", "3"],
        &["seward"],
        &["rokhlin-search", "--n", "10", "--samples", "5"],
        &["maximal-check", "--n", "10", "--samples", "20"],
        &["sphere-average", "--n", "4", "--samples", "20"],
        &["rw-experiment", "--config", walk, "--n", "50", "--samples", "5"],
        &["selftest"],
    ];
    for args in runs {
        let out = fsmb(dir.path(), args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let s = summary(dir.path(), args[0]);
        let errors = validate(&schema, &s, "$");
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}

#[test]
fn validator_rejects_bad_summaries() {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let bad = serde_json::json!({"experiment": "entropy", "seed": -1, "checks": [{"name": 3}]});
    let errors = validate(&schema, &bad, "$");
    assert!(errors.iter().any(|e| e.contains("missing")));
    assert!(errors.iter().any(|e| e.contains("$.seed")));
    assert!(errors.iter().any(|e| e.contains("$.checks[0]")));
}

#[test]
fn schema_violations_fail_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "[model]\nkind = \"bernoulli\"\nrank = 2\nprobabilities = [0.5, 0.5]\nextra = 1\n")
        .unwrap();
    let out = fsmb(dir.path(), &["entropy", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("entropy.json").exists());
}

#[test]
fn infeasible_horizon_reports_feasible_bound() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("parity.toml");
    std::fs::write(
        &config,
        "[model]\nkind = \"bernoulli\"\nrank = 2\nprobabilities = [0.3, 0.7]\n\
         [partition]\nwindow = [\"\", \"ab\"]\nlabeling = \"parity\"\n[run]\nsamples = 1\n",
    )
    .unwrap();
    let out = fsmb(
        dir.path(),
        &["entropy", "--method", "normalized-entropy", "--n", "40", "--config", config.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("largest feasible horizon is"), "{stderr}");
}

#[test]
fn env_var_sets_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        Command::new(env!("CARGO_BIN_EXE_fsmb")).arg("seward").env("FSMB_OUTPUT_DIR", dir.path()).output().unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("seward.csv").exists());
}
