use std::fs;
use std::path::Path;

use hawkes_scaling::estimators::ks_distance;
use hawkes_scaling::experiment::{
    run_limit, run_simulate, run_verify, sha256_hex, ExperimentConfig, RowKind, RunManifest, RunOptions,
};
use hawkes_scaling::kernel::eigen_structure;
use hawkes_scaling::limit::heston_params_from_micro;
use hawkes_scaling::Error;
use serde_json::{json, Value};

fn light_model() -> Value {
    json!({
        "phi1": { "family": "exponential-mixture", "params": { "components": [{ "coefficient": 1.0, "rate": 1.0 }] }, "weight": 0.4 },
        "phi2": { "family": "exponential-mixture", "params": { "components": [{ "coefficient": 1.0, "rate": 1.0 }] }, "weight": 0.2 },
        "beta": 3.0
    })
}

fn light(out: &Path) -> Value {
    json!({
        "model": light_model(),
        "sequence": { "regime": "light", "lambda": 1.0, "mu": 1.0 },
        "horizons": [50, 100],
        "paths": 2,
        "master_seed": 99,
        "output_dir": out,
        "limit": { "paths": 3, "steps": 100 },
        "checks": { "limit_samples": 200 }
    })
}

fn heavy(out: &Path) -> Value {
    json!({
        "model": {
            "phi1": { "family": "shifted-power-law", "params": { "alpha": 0.6 }, "weight": 0.4 },
            "phi2": { "family": "shifted-power-law", "params": { "alpha": 0.6 }, "weight": 0.2 },
            "beta": 3.0
        },
        "sequence": { "regime": "heavy", "alpha": 0.6, "lambda_star": 1.0, "mu": 1.0 },
        "horizons": [40, 80],
        "paths": 6,
        "master_seed": 7,
        "output_dir": out,
        "limit": { "form": "fractional", "paths": 2, "steps": 64 },
        "checks": { "limit_samples": 50, "hurst_paths": 4, "hurst_steps": 256 }
    })
}

fn cfg(v: Value) -> ExperimentConfig {
    ExperimentConfig::from_value(v).unwrap()
}

fn check_files(root: &Path, m: &RunManifest) {
    let mut seen = std::collections::HashSet::new();
    for f in &m.files {
        assert!(seen.insert(f.path.clone()), "{} listed twice", f.path);
        let bytes = fs::read(root.join(&f.path)).unwrap();
        assert_eq!(bytes.len() as u64, f.bytes);
        assert_eq!(sha256_hex(&bytes), f.sha256);
    }
    for e in fs::read_dir(root.join("paths")).unwrap() {
        let name = format!("paths/{}", e.unwrap().file_name().to_string_lossy());
        assert!(seen.contains(&name), "{name} not in manifest");
    }
}

fn read_dir_bytes(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(root.join("paths"))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn simulate_is_reproducible_and_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ma = run_simulate(&cfg(light(&a)), RunOptions { workers: 1 }).unwrap();
    check_files(&a, &ma);
    let first = read_dir_bytes(&a);
    run_simulate(&cfg(light(&b)), RunOptions { workers: 1 }).unwrap();
    assert_eq!(first, read_dir_bytes(&b));
    let mc = run_simulate(&cfg(light(&a)), RunOptions { workers: 4 }).unwrap();
    assert_eq!(first, read_dir_bytes(&a));
    assert_eq!(ma.without_wall_clock(), mc.without_wall_clock());
    assert_eq!(ma.seeds.len(), 4);
    assert!(a.join("paths/T100_path0001_events.csv").exists());
    let on_disk: Value = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    for key in ["config_hash", "library_version", "seeds", "summaries", "files", "wall_clock_seconds"] {
        assert!(on_disk.get(key).is_some(), "{key}");
    }
}

#[test]
fn budget_error_names_the_offending_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = light(dir.path());
    v["simulation"] = json!({ "event_budget": 10_000 });
    match run_simulate(&cfg(v), RunOptions::default()) {
        Err(Error::EventBudget { horizon, .. }) => assert_eq!(horizon, 100.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn config_errors_are_specific() {
    let mut v = light(Path::new("x"));
    v.as_object_mut().unwrap().remove("horizons");
    let e = ExperimentConfig::from_value(v).unwrap_err().to_string();
    assert!(e.contains("horizons"), "{e}");
    let mut v = light(Path::new("x"));
    v["limit"]["form"] = json!("fractional");
    assert!(ExperimentConfig::from_value(v).is_err());
    let mut v = light(Path::new("x"));
    v["horizons"] = json!([100, 50]);
    assert!(ExperimentConfig::from_value(v).is_err());
}

#[test]
fn limit_params_follow_the_micro_model() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(light(dir.path()));
    let m = run_limit(&c, RunOptions::default()).unwrap();
    check_files(dir.path(), &m);
    let spec = c.model_spec().unwrap();
    let expected = heston_params_from_micro(&spec, &c.sequence, &eigen_structure(&spec, &c.sequence).unwrap()).unwrap();
    let written: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("params.json")).unwrap()).unwrap();
    assert_eq!(written, serde_json::to_value(expected).unwrap());
    let rows = fs::read_to_string(dir.path().join("paths/limit_path0002.csv")).unwrap();
    assert!(rows.starts_with("time,price,variance"));
    assert_eq!(rows.lines().count(), 102);
}

#[test]
fn model_can_live_in_its_own_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("model.json"), light_model().to_string()).unwrap();
    let mut v = light(Path::new("out"));
    v["model"] = json!("model.json");
    fs::write(dir.path().join("cfg.json"), v.to_string()).unwrap();
    let c = ExperimentConfig::load(&dir.path().join("cfg.json"), &[]).unwrap();
    assert_eq!(c.model_spec().unwrap(), cfg(light(Path::new("x"))).model_spec().unwrap());
    assert_eq!(c.output_dir(), dir.path().join("out"));
}

#[test]
fn zero_tolerance_fails_statistical_rows_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = light(dir.path());
    v["checks"]["tolerance_scale"] = json!(0.0);
    let (m, report) = run_verify(&cfg(v), RunOptions::default()).unwrap();
    check_files(dir.path(), &m);
    assert!(!report.all_pass);
    for r in &report.rows {
        match r.kind {
            RowKind::Statistical => assert_eq!(r.pass, Some(false), "{}", r.name),
            RowKind::Identity => assert_eq!(r.pass, Some(true), "{}", r.name),
            RowKind::Info => assert_eq!(r.pass, None),
        }
    }
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn report_rows_recompute_from_written_data() {
    let dir = tempfile::tempdir().unwrap();
    let (_, report) = run_verify(&cfg(light(dir.path())), RunOptions::default()).unwrap();
    let column = |file: &str, name: &str| -> Vec<f64> {
        let mut rd = csv::Reader::from_path(dir.path().join(file)).unwrap();
        let idx = rd.headers().unwrap().iter().position(|h| h == name).unwrap();
        rd.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
    };
    let micro = column("paths/verify_T100.csv", "price_1");
    let limit = column("paths/limit_price_1.csv", "value");
    let ks = ks_distance(&micro, &limit).unwrap().statistic;
    let row = report.rows.iter().find(|r| r.name.starts_with("KS")).unwrap();
    assert_eq!(row.value, ks);
    let wb = column("paths/verify_T100.csv", "wb");
    let row = report.rows.iter().find(|r| r.name.starts_with("bracket [W,B]")).unwrap();
    assert!((row.value - wb.iter().sum::<f64>() / wb.len() as f64).abs() < 1e-15);
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    for rec in json["records"].as_array().unwrap() {
        for key in ["estimator", "params", "point", "stderr", "n", "seed_manifest"] {
            assert!(rec.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn heavy_verify_writes_hurst_data() {
    let dir = tempfile::tempdir().unwrap();
    let (m, report) = run_verify(&cfg(heavy(dir.path())), RunOptions::default()).unwrap();
    check_files(dir.path(), &m);
    assert!(report.rows.iter().any(|r| r.name.starts_with("Hurst")));
    assert!(report.rows.iter().all(|r| !r.name.starts_with("bracket")));
    assert!(dir.path().join("paths/hurst_variance0003.csv").exists());
    let params: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("params.json")).unwrap()).unwrap();
    assert_eq!(params["theta"], json!(4.0));
}
