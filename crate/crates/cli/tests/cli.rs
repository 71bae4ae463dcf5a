use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ratedml::demo::write_demo_inputs;
use ratedml::manifest::{read_manifest, MANIFEST_FILE};
use ratedml_core::synth::FixtureSpec;

fn ratedml(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ratedml")).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not json: {text}"))
}

fn small_inputs(dir: &Path) -> PathBuf {
    write_demo_inputs(dir, &FixtureSpec { n_funds: 10, ..FixtureSpec::default() }).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn linear_recovers_the_fixture_effect() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_demo_inputs(dir.path(), &FixtureSpec::default()).unwrap();
    let out = dir.path().join("lin");
    let o = ratedml(&["run", "--config", arg(&config), "--learner", "linear", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = rows(&out.join("results.csv"));
    assert_eq!(r.len(), 1);
    let (coef, se): (f64, f64) = (r[0][1].parse().unwrap(), r[0][2].parse().unwrap());
    assert!((coef + 5.0).abs() <= 3.0 * se, "{coef} ± {se}");
    let header = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(header.starts_with("model,coef,se,t,p,ci_low,ci_high,n,per_1pct\n"));
}

#[test]
fn both_learners_give_two_rows_and_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_inputs(dir.path());
    let out = dir.path().join("out");
    let o = ratedml(&["run", "--config", arg(&config), "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(rows(&out.join("results.csv")).len(), 2);
    assert_eq!(rows(&out.join("r2.csv")).len(), 2);
    assert_eq!(rows(&out.join("per_1pct.csv")).len(), 2);
    for f in [
        "corr.csv",
        "pca.csv",
        "adf.csv",
        "residuals.csv",
        "residuals_linear.csv",
        "residuals_boosted.csv",
        "fitted.csv",
        "grid_y.csv",
        "grid_d.csv",
        "corr_heatmap.svg",
        "pca_scree.svg",
        "residuals_fitted.svg",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    // the I(2) series is screened out, the treatment is kept
    let adf = rows(&out.join("adf.csv"));
    let verdict = |v: &str| adf.iter().find(|r| r[0] == v).unwrap()[3].clone();
    assert_eq!(verdict("nrou"), "NonStationary");

    let m = read_manifest(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.seed, 7);
    assert_eq!(m.design["dropped_variables"], serde_json::json!(["nrou"]));
    assert_eq!(m.design["lag_selection"]["used"], 7);
    assert!(!m.reproducibility.compared);
    for (name, entry) in &m.files {
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(entry.bytes, bytes.len() as u64, "{name}");
    }
    assert!(m.files.contains_key("results.csv") && !m.files.contains_key(MANIFEST_FILE));

    // rerun into the same directory: audit compares against the first run
    let again = ratedml(&["run", "--config", arg(&config), "--out", arg(&out)]);
    assert!(again.status.success());
    let m2 = read_manifest(&out.join(MANIFEST_FILE)).unwrap();
    assert!(m2.reproducibility.passed(), "{:?}", m2.reproducibility);
    assert_eq!(m2.reproducibility.matched.len(), m.files.len());
}

#[test]
fn auto_lag_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_inputs(dir.path());
    let out = dir.path().join("auto");
    let o = ratedml(&[
        "run", "--config", arg(&config), "--learner", "linear", "--lag", "auto", "--k", "3", "--seed", "11", "--out",
        arg(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_manifest(&out.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.seed, 11);
    assert_eq!(m.config["k"], 3);
    let aic = m.design["lag_selection"]["aic_by_order"].as_array().unwrap();
    assert_eq!(aic.len(), 12);
    let used = m.design["lag_selection"]["used"].as_u64().unwrap();
    assert!((1..=12).contains(&used));
}

#[test]
fn unknown_treatment_is_a_config_error_and_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_inputs(dir.path());
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&config).unwrap()).unwrap();
    v["treatment"] = "gdp".into();
    std::fs::write(&config, v.to_string()).unwrap();
    let out = dir.path().join("never");
    let o = ratedml(&["run", "--config", arg(&config), "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["exit_code"], 1);
    assert!(e["message"].as_str().unwrap().contains("gdp"));
    assert!(!out.exists());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().contains(".partial-"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn failure_midway_keeps_the_previous_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_inputs(dir.path());
    let out = dir.path().join("out");
    assert!(ratedml(&["run", "--config", arg(&config), "--learner", "linear", "--out", arg(&out)]).status.success());
    let before = std::fs::read(out.join("results.csv")).unwrap();

    // the grid is read after several files have been staged
    std::fs::write(dir.path().join("grid.json"), "[]").unwrap();
    let o = ratedml(&["run", "--config", arg(&config), "--learner", "boosted", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(out.join("results.csv")).unwrap(), before);
    assert!(!out.join("grid_y.csv").exists());
    let names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().all(|n| !n.contains(".partial-")), "{names:?}");
}

#[test]
fn too_few_funds_for_encoding_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_demo_inputs(dir.path(), &FixtureSpec { n_funds: 4, ..FixtureSpec::default() }).unwrap();
    let o = ratedml(&["run", "--config", arg(&config), "--learner", "linear", "--out", arg(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("fund-level columns"));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_inputs(dir.path());
    std::fs::write(dir.path().join("funds.csv"), "date,F01\n2010-01,0.1\n2010-03,0.2\n").unwrap();
    let o = ratedml(&["run", "--config", arg(&config), "--out", arg(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "data");
}

#[test]
fn foreign_output_directory_is_not_overwritten() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_inputs(dir.path());
    let out = dir.path().join("precious");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("notes.txt"), "keep me").unwrap();
    let o = ratedml(&["run", "--config", arg(&config), "--learner", "linear", "--out", arg(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read_to_string(out.join("notes.txt")).unwrap(), "keep me");
}

#[test]
fn plots_redrawn_from_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_inputs(dir.path());
    let out = dir.path().join("out");
    assert!(ratedml(&["run", "--config", arg(&config), "--learner", "linear", "--out", arg(&out)]).status.success());
    for f in ["corr_heatmap.svg", "pca_scree.svg", "residuals_fitted.svg"] {
        std::fs::remove_file(out.join(f)).unwrap();
    }
    let o = ratedml(&["plots", "--out", arg(&out)]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(out.join("corr_heatmap.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("fund_return") && !svg.contains("href"));

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = ratedml(&["plots", "--out", arg(&empty)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["message"].as_str().unwrap().contains("missing input"));
}

#[test]
fn validate_with_one_rep_fails_as_insufficient() {
    let o = ratedml(&["validate", "--reps", "1"]);
    assert_eq!(o.status.code(), Some(4));
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().filter(|l| l.contains("insufficient reps")).count(), 5, "{out}");
    assert_eq!(out.lines().count(), 10);
    assert_eq!(stderr_json(&o)["error"], "validation");
}
