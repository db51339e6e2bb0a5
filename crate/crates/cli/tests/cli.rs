use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_debranges"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn free_spectrum_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum", "--config", &config("free.json"), "--lambda-max", "625"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json(dir.path().join("free.measure.json"));
    let atoms = m["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 25);
    for (i, a) in atoms.iter().enumerate() {
        let n = (i + 1) as f64;
        let lambda = a["lambda"].as_f64().unwrap();
        let weight = a["weight"].as_f64().unwrap();
        assert!((lambda - n * n).abs() < 1e-8 * n * n);
        assert!((weight - 2.0 * n * n / PI).abs() < 1e-8 * weight);
    }
}

#[test]
fn measure_file_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum", "--config", &config("free.json"), "--format", "csv"]);
    assert!(out.status.success());
    let cfg = write_config(
        dir.path(),
        "with_measure.json",
        r#"{"schema":"v1","name":"with_measure","operator":{"kind":"regular","b":"pi"},
            "lambda_max":625,"measure_file":"free.measure.csv","probes":4}"#,
    );
    let out = run(dir.path(), &["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn same_seed_gives_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("cosine.json");
    for d in [&a, &b] {
        let out = run(d.path(), &["transform", "--config", &cfg, "--seed", "7", "--lambda-max", "100"]);
        assert!(out.status.success());
    }
    for f in ["cosine.transform.csv", "cosine.transform.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    run(c.path(), &["transform", "--config", &cfg, "--seed", "8", "--lambda-max", "100"]);
    assert_ne!(
        fs::read(a.path().join("cosine.transform.csv")).unwrap(),
        fs::read(c.path().join("cosine.transform.csv")).unwrap()
    );
}

#[test]
fn corrupted_measure_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum", "--config", &config("free.json")]);
    assert!(out.status.success());
    let path = dir.path().join("free.measure.json");
    let mut m = json(path.clone());
    let w = m["atoms"][0]["weight"].as_f64().unwrap();
    m["atoms"][0]["weight"] = Value::from(3.0 * w);
    fs::write(dir.path().join("corrupt.json"), serde_json::to_string(&m).unwrap()).unwrap();
    let cfg = write_config(
        dir.path(),
        "corrupt_cfg.json",
        r#"{"schema":"v1","name":"corrupt","operator":{"kind":"regular","b":"pi"},
            "lambda_max":625,"measure_file":"corrupt.json","probes":4}"#,
    );
    let out = run(dir.path(), &["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(dir.path().join("corrupt.verify.json"));
    assert_eq!(report["passed"], Value::Bool(false));
    assert_eq!(report["suites"][0]["name"], "parseval");
    assert_eq!(report["suites"][0]["passed"], Value::Bool(false));
}

#[test]
fn bad_configs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"schema":"v2","name":"x","operator":{"kind":"regular","b":1}}"#,
        r#"{"schema":"v1","name":"x","operator":{"kind":"regular","b":1,"extra":0}}"#,
        r#"{"schema":"v1","name":"x","operator":{"kind":"regular","a":2,"b":1}}"#,
        r#"{"schema":"v1","name":"x","operator":{"kind":"regular","b":1},"measure_file":"missing.json"}"#,
        r#"not json"#,
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("bad{i}.json"), body);
        let out = run(dir.path(), &["spectrum", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "case {i}: {body}");
    }
    let out = run(dir.path(), &["spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["spectrum", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bessel_kernel_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "origin.json",
        r#"{"schema":"v1","name":"origin","operator":{"kind":"bessel","l":1,"b":"pi"},
            "kernel":{"c":"pi","grid":"diagonal","points":1,"radius":0}}"#,
    );
    let out = run(dir.path(), &["kernel", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("origin.kernel.csv")).unwrap();
    let row = rdr.records().next().unwrap().unwrap();
    let formula: f64 = row[4].parse().unwrap();
    let integral: f64 = row[6].parse().unwrap();
    let exact = PI.powi(5) / 5.0;
    assert!((formula - exact).abs() < 1e-8 * exact, "{formula}");
    assert!((integral - exact).abs() < 1e-8 * exact, "{integral}");
}

fn verdict(cfg: &str) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["uniqueness", "--config", &config(cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let name = cfg.trim_end_matches(".json");
    json(dir.path().join(format!("{name}.uniqueness.json")))
}

#[test]
fn uniqueness_verdicts() {
    let r = verdict("shifted_pair.json");
    assert_eq!(r["verdict"], "equal up to shift");
    assert!((r["eta"]["intercept"].as_f64().unwrap() - 0.3).abs() < 1e-5);
    assert_eq!(verdict("bessel_self_pair.json")["verdict"], "equal up to shift");
    let r = verdict("bessel_l0_vs_l1.json");
    assert_eq!(r["verdict"], "distinct");
    assert_eq!(r["measures_equal"], Value::Bool(false));
}

#[test]
fn uniqueness_requires_second_operator() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["uniqueness", "--config", &config("free.json")]);
    assert_eq!(out.status.code(), Some(2));
}
