use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latent_geodesic::cli::CurveFile;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latent-geodesic"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn interpolate_writes_curve_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "interpolate",
        "--generator",
        "radial-warp",
        "--from",
        "-1.2,0",
        "--to",
        "1.2,0",
        "--method",
        "geod-reg",
        "--mu",
        "0.05",
        "--max-iters",
        "300",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["config.json", "curve.json", "report.json", "trace.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let curve: CurveFile = serde_json::from_str(&std::fs::read_to_string(dir.path().join("curve.json")).unwrap()).unwrap();
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(curve.k, 35);
    assert_eq!(curve.points[0].latent, vec![-1.2, 0.0]);
    let stored = report["ambient_length"].as_f64().unwrap();
    assert!((curve.ambient_length() - stored).abs() < 1e-12 * stored);
    assert_eq!(report["iterations"], 300);

    let config = std::fs::read_to_string(dir.path().join("config.json")).unwrap();
    assert!(config.contains("\"k\": 35"));
    assert!(config.contains("\"mu\": 0.05"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    std::fs::write(
        &cfg_path,
        r#"{"generator": {"builtin": "identity"}, "from": [0, 0], "to": [1, 1], "solver": {"k": 9, "max_iters": 5}, "methods": ["geod"]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "interpolate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--k",
        "11",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = read_json(&out.join("config.json"));
    assert_eq!(echo["solver"]["k"], 11);
    assert_eq!(echo["solver"]["max_iters"], 5);
    let curve = read_json(&out.join("curve.json"));
    assert_eq!(curve["method"], "geod");
    assert_eq!(curve["points"].as_array().unwrap().len(), 11);
}

#[test]
fn compare_writes_every_curve_and_a_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "compare",
        "--mu",
        "0.05",
        "--max-iters",
        "200",
        "--oracle",
        "--oracle-resolution",
        "32",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for m in ["geod_reg", "geod", "straight_z"] {
        assert!(dir.path().join(format!("curve_{m}.json")).exists());
    }
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert!(csv.starts_with("method,length,energy,min_log_density,oracle_gap\n"));
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(String::from_utf8_lossy(&o.stdout), csv);
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn compare_is_deterministic() {
    let go = || {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&[
            "compare",
            "--generator",
            "toy-gan",
            "--from=-1,0",
            "--to=1,0",
            "--max-iters",
            "100",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(dir.path().join("report.json")).unwrap()
    };
    assert_eq!(go(), go());
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["interpolate", "--method", "geod-reg", "--mu", "0", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid config"));

    let o = run(&["compare", "--method", "spline", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("straight-z") && err.contains("geod-reg"), "{err}");

    let o = run(&["interpolate", "--from", "1,2,3", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["interpolate", "--generator", "stylegan", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["interpolate", "--bogus-flag"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_weight_file_exits_with_two() {
    let o = run(&["interpolate", "--weights", "/no/such/weights.json", "--out", "/tmp/unused"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/weights.json"));
    let o = run(&["validate-weights", "/no/such/weights.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_weights_accepts_the_toy_gan() {
    let o = bin()
        .arg("validate-weights")
        .arg(fixture("toy_gan.json"))
        .arg("--fixtures")
        .arg(fixture("toy_gan_forward.json"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("max discrepancy"));
    assert!(stdout.contains("100 pairs"));
}

#[test]
fn validate_weights_rejects_broken_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("toy_gan.json")).unwrap();

    let truncated = dir.path().join("truncated.json");
    std::fs::write(&truncated, &text[..text.len() / 3]).unwrap();
    let o = bin().arg("validate-weights").arg(&truncated).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));

    let nan = dir.path().join("nan.json");
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["generator"]["layers"][0]["bias"][0] = Value::String("NaN".into());
    let broken = serde_json::to_string_pretty(&v).unwrap().replace("\"NaN\"", "NaN");
    std::fs::write(&nan, broken).unwrap();
    let o = bin().arg("validate-weights").arg(&nan).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema error"));
}

#[test]
fn point_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let from = dir.path().join("from.json");
    std::fs::write(&from, "[-1.0, 0.5]").unwrap();
    let o = run(&[
        "interpolate",
        "--method",
        "straight-z",
        "--from",
        &format!("@{}", from.display()),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let curve = read_json(&dir.path().join("out/curve.json"));
    assert_eq!(curve["points"][0]["latent"], serde_json::json!([-1.0, 0.5]));
    assert!(!dir.path().join("out/trace.json").exists());
}
