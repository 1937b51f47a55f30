use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn covdecay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covdecay"))
        .args(args)
        .env_remove("COVDECAY_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = covdecay(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_is_seed_deterministic_and_feeds_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        ok(&["simulate", "--schedule", "ar1:0.5", "--n", "2000", "--seed", "3", "--out", p(f)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let stdout = ok(&["simulate", "--schedule", "ar1:0.5", "--n", "2000", "--seed", "3"]);
    assert_eq!(stdout.as_bytes(), std::fs::read(&a).unwrap());

    let report: Value = serde_json::from_str(&ok(&["estimate", "--in", p(&a), "--m", "5", "--estimators", "ar1,ma1"])).unwrap();
    let est = &report["estimates"];
    assert_eq!(est[0]["estimator"], "ar1");
    let phi = est[0]["value"].as_f64().unwrap();
    assert!((phi - 0.5).abs() < 0.05, "{phi}");
    assert_eq!(report["lag_estimates"]["rho_hat"].as_array().unwrap().len(), 5);
}

#[test]
fn fgm_generator_needs_a_certified_kappa() {
    let out = covdecay(&["simulate", "--schedule", "fgm-power:2,1.7", "--marginal", "evi:0,1", "--n", "3", "--generator", "fgm"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa0"));
    let csv = ok(&["simulate", "--schedule", "fgm-power:2,2.25", "--marginal", "evi:0,1", "--n", "3", "--generator", "fgm"]);
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn kconst_prints_constants_and_rejects_ambiguous_exponential() {
    let v: Value = serde_json::from_str(&ok(&[
        "kconst", "--family", "amh", "--marginal0", "exp-scale:1", "--marginaln", "exp-rate:1", "--order", "64",
    ]))
    .unwrap();
    assert!((v["k1"][0].as_f64().unwrap() - 0.25).abs() < 1e-4);
    assert!((v["k2"][0][0].as_f64().unwrap() - 1.0 / 18.0).abs() < 1e-4);
    assert_eq!(v["grid_order"], 64);

    let out = covdecay(&["kconst", "--family", "amh", "--marginal0", "exp"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exp-rate"));
    assert!(!covdecay(&["kconst", "--family", "w"]).status.success());
}

#[test]
fn mc_table_output_does_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"model":"ma1","params":[-0.5,0.5],"n":400,"replications":16,"m":[1],"seed":9}"#,
    )
    .unwrap();
    let run = |threads: &str, env: Option<&str>| {
        let out_dir = dir.path().join(format!("out-{threads}-{}", env.unwrap_or("none")));
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_covdecay"));
        cmd.args(["mc-table", "--config", p(&cfg), "--out", p(&out_dir)]);
        cmd.env_remove("COVDECAY_THREADS");
        if !threads.is_empty() {
            cmd.args(["--threads", threads]);
        }
        if let Some(e) = env {
            cmd.env("COVDECAY_THREADS", e);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let table = std::fs::read(out_dir.join("mc_table.csv")).unwrap();
        assert_eq!(out.stdout, table);
        let manifest: Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
        (table, std::fs::read(out_dir.join("replications.csv")).unwrap(), manifest)
    };
    let (t1, r1, m1) = run("1", None);
    let (t4, r4, m4) = run("4", None);
    let (te, re, me) = run("", Some("3"));
    assert_eq!(t1, t4);
    assert_eq!(r1, r4);
    assert_eq!(t1, te);
    assert_eq!(r1, re);
    assert_eq!(m1["threads"], 1);
    assert_eq!(m4["threads"], 4);
    assert_eq!(me["threads"], 3);
    assert_eq!(m1["input_hash"], m4["input_hash"]);
    assert_eq!(m1["input_hash"].as_str().unwrap().len(), 64);
    let table = String::from_utf8(t1).unwrap();
    assert!(table.starts_with("param,estimator,m,mean,mse,failures\n"));
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn analyze_writes_plot_ready_files() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    ok(&["simulate", "--schedule", "arfima:0.3", "--marginal", "exp-scale:0.01", "--n", "1200", "--seed", "4", "--out", p(&series)]);
    let out_dir = dir.path().join("analysis");
    let export = dir.path().join("export.csv");
    let summary: Value = serde_json::from_str(&ok(&[
        "analyze",
        "--in",
        p(&series),
        "--raw",
        "--m",
        "20",
        "--bootstrap-mean-block",
        "20",
        "--bootstrap-b",
        "100",
        "--seed",
        "1",
        "--out-dir",
        p(&out_dir),
        "--export",
        p(&export),
    ]))
    .unwrap();
    let est = &summary["estimates"];
    let beta = est["beta_corrected"]["value"].as_f64().unwrap();
    let d = est["d_corrected"]["value"].as_f64().unwrap();
    assert!((beta - (1.0 - 2.0 * d)).abs() < 1e-12);
    let ci = &summary["beta_corrected_ci"];
    assert!(ci["lo95"].as_f64().unwrap() <= ci["hi95"].as_f64().unwrap());
    for f in ["report.json", "acf.csv", "periodogram.csv", "histogram.csv", "lags.csv", "trace.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let acf = std::fs::read_to_string(out_dir.join("acf.csv")).unwrap();
    assert_eq!(acf.lines().count(), 51);
    let lags = std::fs::read_to_string(out_dir.join("lags.csv")).unwrap();
    assert!(lags.starts_with("lag,rho_hat,pairs\n"));
    assert_eq!(lags.lines().count(), 21);
    // the exported series reads back to the same values
    let original = std::fs::read_to_string(&series).unwrap();
    let exported = std::fs::read_to_string(&export).unwrap();
    let values = |s: &str, skip: usize| -> Vec<f64> {
        s.lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').nth(skip).unwrap().parse().unwrap())
            .collect()
    };
    assert_eq!(values(&original, 1), values(&exported, 0));
}

#[test]
fn analyze_rejects_non_positive_prices() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    std::fs::write(&prices, "close\n10\n11\n0\n12\n").unwrap();
    let out = covdecay(&["analyze", "--in", p(&prices)]);
    assert!(!out.status.success());
}
