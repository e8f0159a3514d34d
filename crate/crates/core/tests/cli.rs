use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const AR_BOUNDS: &str = r#"{"kind":"ar-bounds","seed":1,"params":{"example":{"discrete":{"gamma":2,"x":0.0}},"t_min":0,"t_max":12}}"#;

fn wamcmc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wamcmc"))
        .args(args)
        .current_dir(dir)
        .env_remove("AMCMC_OUT_DIR")
        .output()
        .unwrap()
}

fn run_config(kind: &str, config: &str, dir: &Path) -> Output {
    std::fs::write(dir.join("cfg.json"), config).unwrap();
    wamcmc(&[kind, "--config", "cfg.json", "--out", "out"], dir)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn ar_bounds_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("ar-bounds", AR_BOUNDS, tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ar-bounds: PASS (13 rows)"));
    let out = tmp.path().join("out");
    let csv = std::fs::read_to_string(out.join("ar-bounds.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,exact_distance,paper_bound,satisfied"));
    for (t, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], t.to_string());
        let d: f64 = f[1].parse().unwrap();
        assert!((d - 2f64.powi(-(t as i32 + 1))).abs() <= 1e-12);
        assert_eq!(f[2].parse::<f64>().unwrap(), 2f64.powi(-(t as i32)));
        assert_eq!(f[3], "true");
    }
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("ar-bounds.csv.json")).unwrap()).unwrap();
    assert_eq!(side["kind"], "ar-bounds");
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(side["config_hash"], manifest["config_hash"]);
    assert!(manifest["wall_clock"]["elapsed_seconds"].is_number());
    for f in manifest["files"].as_array().unwrap() {
        let bytes = std::fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(!summary.contains("wall_clock"));
}

#[test]
fn floats_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"ar-bounds","seed":1,"params":{"example":{"gaussian":{"cov":{"diag":[1.0,0.5]},"gamma":0.7,"x":[0.1,2.0]}},"t_max":30}}"#;
    let o = run_config("ar-bounds", cfg, tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("out/ar-bounds.csv")).unwrap();
    for line in csv.lines().skip(1) {
        for field in line.split(',').skip(1).take(2) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v}"), field);
        }
    }
}

#[test]
fn harris_summary_has_alpha_star() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"harris","seed":1,"params":{"lambda":0.5,"k":1.0,"kappa":0.2,"alpha":0.2,"delta":0.1}}"#;
    let o = run_config("harris", cfg, tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap()).unwrap();
    let a = s["values"]["alpha_star"].as_f64().unwrap();
    assert!((a - 0.00411).abs() < 5e-6);
    assert_eq!(s["values"]["beta_star"].as_f64().unwrap(), 0.05);
}

#[test]
fn missing_seed_is_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("harris", r#"{"kind":"harris","params":{"lambda":0.5}}"#, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn seed_flag_supplies_seed() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("cfg.json"),
        r#"{"kind":"harris","params":{"lambda":0.5,"k":1.0,"kappa":0.2,"alpha":0.2,"delta":0.1}}"#,
    )
    .unwrap();
    let o = wamcmc(&["harris", "--config", "cfg.json", "--out", "out", "--seed", "17"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = std::fs::read_to_string(tmp.path().join("out/summary.json")).unwrap();
    assert!(s.contains("\"seed\": 17"));
}

#[test]
fn unknown_field_is_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("harris", r#"{"kind":"harris","seed":1,"params":{"lamda":0.5}}"#, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("unknown-field") && err.contains("lamda"), "{err}");
}

#[test]
fn ula_step_size_is_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"simulate","seed":1,"horizon":5,"kernel":{"family":"ula","hessian":{"diag":[1.0,4.0]},"h_min":0.05},
        "init":{"tuning":{"langevin":{"m":{"diag":[1.0,1.0]},"h":0.3}},"state":{"vector":[0.0,0.0]}}}"#;
    let o = run_config("simulate", cfg, tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1/(alpha+beta)"));
}

#[test]
fn kind_must_match_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_config("harris", AR_BOUNDS, tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn violated_drift_bound_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"drift","seed":1,"kernel":{"family":"gaussian_ar","cov":{"diag":[1.0]},"gamma_max":0.95},
        "init":{"tuning":{"ar_coef":0.6},"state":{"vector":[0.0]}},
        "params":{"test_points":[{"vector":[0.0]},{"vector":[2.0]}],"samples_per_point":400,"drift_lambda":0.0,"drift_l":0.0}}"#;
    let o = run_config("drift", cfg, tmp.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("drift: FAIL"));
}

#[test]
fn report_on_empty_dir_is_missing_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let o = wamcmc(&["report", "--out", "empty"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("missing-artifact"));
}

#[test]
fn censoring_note_is_reported_verbatim() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"kind":"containment","seed":1,"kernel":{"family":"discrete_ar"},
        "init":{"tuning":{"discrete_base":2},"state":{"real":0.0}},"params":{"eps":0.01,"n_max":3}}"#;
    let o = run_config("containment", cfg, tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("censored: distance exceeds eps=0.01 at n_max=3"), "{stdout}");
    let again = wamcmc(&["report", "--out", "out"], tmp.path());
    assert_eq!(String::from_utf8_lossy(&again.stdout), stdout);
}

#[test]
fn env_var_overrides_out_flag() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), AR_BOUNDS).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wamcmc"))
        .args(["ar-bounds", "--config", "cfg.json", "--out", "flag"])
        .current_dir(tmp.path())
        .env("AMCMC_OUT_DIR", "envdir")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(tmp.path().join("envdir/summary.json").exists());
    assert!(!tmp.path().join("flag").exists());
}
