//! The batch run: ingest, difference, screen, choose lags, build the panel,
//! tune, cross-fit and write every artifact.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::json;

use ratedml_core::dml::{
    rescale_per_1pct, run_dml, write_residuals_csv, write_results_csv, DmlOptions, DmlResult, NuisanceLearners,
    NuisanceResiduals, RunMode,
};
use ratedml_core::learners::{default_grid, grid_search_cv, read_grid_json, write_grid_csv, HyperParams, LearnerSpec};
use ratedml_core::panel_data::{
    filter_funds, load_fund_catalog, load_tscs_csv, to_panel, CsvSchema, Month, TimeSeriesMatrix,
};
use ratedml_core::preprocess::{
    correlation_matrix, difference_matrix, pca_corr, screen_stationarity, select_lag_var_aic, LagChoice,
};
use ratedml_core::rng::{derive_seed, RNG_IDENTITY};
use ratedml_core::PlrProblem;

use crate::config::{LagSetting, LearnerChoice, PipelineConfig, AUTO_LAG_MAX};
use crate::error::CliError;
use crate::manifest::{self, Manifest, ReproAudit, MANIFEST_FILE};
use crate::plots::emit_plots;
use crate::report;

/// Name of the cross-sectional mean return in the correlation outputs.
pub const FUND_RETURN: &str = "fund_return";

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub output_dir: PathBuf,
    pub results: Vec<DmlResult>,
    pub lag_order: usize,
    pub dropped: Vec<String>,
    pub reproducibility: ReproAudit,
}

/// Runs the whole pipeline. Outputs are written to a staging directory and
/// moved into place only when every step succeeded.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome, CliError> {
    cfg.validate()?;
    let out = cfg.output_dir.clone();
    check_replaceable(&out)?;
    let previous = manifest::read_manifest(&out.join(MANIFEST_FILE));

    let staging = staging_dir(&out);
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(CliError::io(&staging))?;
    }
    std::fs::create_dir_all(&staging).map_err(CliError::io(&staging))?;

    match stage(cfg, &staging, previous.as_ref()) {
        Ok(mut outcome) => {
            if out.exists() {
                std::fs::remove_dir_all(&out).map_err(CliError::io(&out))?;
            }
            std::fs::rename(&staging, &out).map_err(CliError::io(&out))?;
            outcome.output_dir = out;
            Ok(outcome)
        }
        Err(e) => {
            let _ = std::fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}

fn staging_dir(out: &Path) -> PathBuf {
    let name = out.file_name().map_or_else(|| "out".into(), |n| n.to_string_lossy().into_owned());
    let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    parent.join(format!(".{name}.partial-{}", std::process::id()))
}

/// Only an empty directory or a previous run's output may be replaced.
fn check_replaceable(out: &Path) -> Result<(), CliError> {
    if !out.exists() {
        return Ok(());
    }
    if !out.is_dir() {
        return Err(CliError::Config(format!("output path {} exists and is not a directory", out.display())));
    }
    let mut entries = std::fs::read_dir(out).map_err(CliError::io(out))?;
    if entries.next().is_none() || out.join(MANIFEST_FILE).is_file() {
        return Ok(());
    }
    Err(CliError::Config(format!(
        "refusing to overwrite {}: it is not empty and holds no {MANIFEST_FILE}",
        out.display()
    )))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(CliError::io(&path))
}

/// Restricts both matrices to the months they share.
fn align(a: &TimeSeriesMatrix, b: &TimeSeriesMatrix) -> Result<(TimeSeriesMatrix, TimeSeriesMatrix), CliError> {
    let span = |m: &TimeSeriesMatrix| -> Option<(Month, Month)> {
        Some((*m.time_index().first()?, *m.time_index().last()?))
    };
    let (Some((a0, a1)), Some((b0, b1))) = (span(a), span(b)) else {
        return Err(CliError::Data("an input file has no rows".into()));
    };
    let (start, end) = (a0.max(b0), a1.min(b1));
    if start > end {
        return Err(CliError::Data(format!("fund months {a0}..{a1} and macro months {b0}..{b1} do not overlap")));
    }
    let cut = |m: &TimeSeriesMatrix, first: Month| {
        let s = start.months_since(first) as usize;
        let e = end.months_since(first) as usize + 1;
        m.slice_rows(s, e)
    };
    Ok((cut(a, a0), cut(b, b0)))
}

fn mean_return(funds: &TimeSeriesMatrix) -> Vec<Option<f64>> {
    (0..funds.n_rows())
        .map(|r| {
            let vals: Vec<f64> = (0..funds.n_cols()).filter_map(|c| funds.get(r, c)).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect()
}

fn load_grid(cfg: &PipelineConfig) -> Result<Vec<HyperParams>, CliError> {
    match &cfg.grid {
        None => Ok(default_grid()),
        Some(path) => {
            let file = File::open(path)
                .map_err(|e| CliError::Config(format!("cannot read grid {}: {e}", path.display())))?;
            Ok(read_grid_json(std::io::BufReader::new(file))?)
        }
    }
}

/// Every appended mean is constant within a fund, so together with the
/// intercept they span at most `n_units` directions. OLS cannot fit more.
fn check_encoding_rank(cfg: &PipelineConfig, problem: &PlrProblem) -> Result<(), CliError> {
    if cfg.learner == LearnerChoice::Boosted {
        return Ok(());
    }
    let e = cfg.encoding;
    let appended = if e.regressor_means { problem.encoded_columns().len() } else { 0 } + usize::from(e.outcome_mean);
    if appended > 0 && appended >= problem.n_units() {
        return Err(CliError::Config(format!(
            "means-encoding appends {appended} fund-level columns but only {} funds remain; \
             the linear learner needs more funds than that (add funds or set encoding.regressor_means to false)",
            problem.n_units()
        )));
    }
    Ok(())
}

struct Fit {
    result: DmlResult,
    residuals: NuisanceResiduals,
    slug: &'static str,
}

fn stage(cfg: &PipelineConfig, dir: &Path, previous: Option<&Manifest>) -> Result<PipelineOutcome, CliError> {
    let schema = CsvSchema { time_column: cfg.time_column.clone() };
    let mut funds = load_tscs_csv(&cfg.funds, &schema)?;
    let macro_levels = load_tscs_csv(&cfg.macro_vars, &schema)?;

    let n_funds_in_file = funds.n_cols();
    if let Some(meta_path) = &cfg.metadata {
        let catalog = load_fund_catalog(meta_path)?;
        let accepted: HashSet<String> =
            filter_funds(&catalog, &cfg.filter.clone().unwrap_or_default()).into_iter().map(|f| f.ticker).collect();
        let keep: Vec<&str> =
            funds.columns().iter().filter(|c| accepted.contains(c.as_str())).map(String::as_str).collect();
        if keep.is_empty() {
            return Err(CliError::Data("no fund in the returns file passes the metadata filter".into()));
        }
        funds = funds.select(&keep)?;
    }

    if macro_levels.position(&cfg.treatment).is_none() {
        return Err(CliError::Config(format!(
            "treatment `{}` is not a column of {}",
            cfg.treatment,
            cfg.macro_vars.display()
        )));
    }
    let (funds, macro_levels) = align(&funds, &macro_levels)?;
    let diffs = difference_matrix(&macro_levels);

    let screen = screen_stationarity(&diffs, cfg.level, LagChoice::Auto)?;
    screen.write_audit_csv(create(dir, "adf.csv")?)?;
    let dropped: Vec<String> = screen.dropped.iter().map(|e| e.variable.clone()).collect();
    let treatment_nonstationary = dropped.contains(&cfg.treatment);
    let controls = screen.kept.without(&cfg.treatment);
    let treatment: Vec<Option<f64>> = diffs.column(&cfg.treatment).expect("checked above").to_vec();

    // monthly block: mean fund return, treatment, retained controls
    let mut block = TimeSeriesMatrix::new(
        funds.time_index().to_vec(),
        vec![FUND_RETURN.to_string(), cfg.treatment.clone()],
        vec![mean_return(&funds), treatment.clone()],
    )?;
    for (name, col) in controls.iter_columns() {
        block.push_column(name.to_string(), col.to_vec())?;
    }

    let (lag_order, aic_table) = match cfg.lag_order {
        LagSetting::Fixed(p) => (p, None),
        LagSetting::Auto => {
            let complete = block
                .complete_block()
                .ok_or_else(|| CliError::Data("no gap-free stretch of months for lag selection".into()))?;
            let sel = select_lag_var_aic(&complete, AUTO_LAG_MAX)?;
            (sel.order, Some(sel))
        }
    };

    let corr = correlation_matrix(&block)?;
    let pca = pca_corr(corr.values.view())?;
    report::write_corr_csv(&corr, create(dir, "corr.csv")?)?;
    report::write_pca_csv(&corr.names, &pca, create(dir, "pca.csv")?)?;

    let panel = to_panel(&funds, &cfg.treatment, &treatment, &controls, lag_order)?;
    if panel.is_empty() {
        return Err(CliError::Data(format!("no fund has {} complete months to build lags from", lag_order + 1)));
    }
    let problem = PlrProblem::from_panel(&panel)?;
    check_encoding_rank(cfg, &problem)?;

    let opts = DmlOptions {
        k: cfg.k,
        seed: cfg.seed,
        fold_mode: cfg.fold_mode,
        encoding: cfg.encoding,
        score: cfg.score,
        mode: RunMode::CrossFit,
    };

    let mut fits: Vec<Fit> = Vec::new();
    let mut tuned = serde_json::Value::Null;
    if matches!(cfg.learner, LearnerChoice::Linear | LearnerChoice::Both) {
        let linear = LearnerSpec::Linear;
        let (result, residuals) = run_dml(&problem, NuisanceLearners::both(&linear), &opts)?;
        fits.push(Fit { result, residuals, slug: "linear" });
    }
    if matches!(cfg.learner, LearnerChoice::Boosted | LearnerChoice::Both) {
        let grid = load_grid(cfg)?;
        let x = problem.x().view();
        let gy = grid_search_cv(x, problem.y().view(), &grid, cfg.k, derive_seed(cfg.seed, 101))?;
        let gd = grid_search_cv(x, problem.d().view(), &grid, cfg.k, derive_seed(cfg.seed, 102))?;
        write_grid_csv(&gy.table, create(dir, "grid_y.csv")?).map_err(CliError::io(dir.join("grid_y.csv")))?;
        write_grid_csv(&gd.table, create(dir, "grid_d.csv")?).map_err(CliError::io(dir.join("grid_d.csv")))?;
        tuned = json!({ "outcome": gy.best, "treatment": gd.best });
        let (ly, ld) = (LearnerSpec::Boosted(gy.best), LearnerSpec::Boosted(gd.best));
        let (result, residuals) = run_dml(&problem, NuisanceLearners { outcome: &ly, treatment: &ld }, &opts)?;
        fits.push(Fit { result, residuals, slug: "boosted" });
    }

    let results: Vec<DmlResult> = fits.iter().map(|f| f.result.clone()).collect();
    write_results_csv(&results, create(dir, "results.csv")?)?;
    report::write_per_1pct_csv(&results, create(dir, "per_1pct.csv")?)?;
    let r2_rows: Vec<(String, f64, f64)> =
        fits.iter().map(|f| (f.result.model.clone(), f.residuals.r2_y, f.residuals.r2_d)).collect();
    report::write_r2_csv(&r2_rows, create(dir, "r2.csv")?)?;

    let primary = fits.last().expect("at least one learner runs");
    write_residuals_csv(&primary.residuals, create(dir, "residuals.csv")?)?;
    report::write_fitted_csv(&primary.residuals, create(dir, "fitted.csv")?)?;
    if fits.len() > 1 {
        for f in &fits {
            write_residuals_csv(&f.residuals, create(dir, &format!("residuals_{}.csv", f.slug))?)?;
        }
    }

    emit_plots(dir)?;

    let files = manifest::hash_dir(dir)?;
    let config_hash = cfg.hash();
    let reproducibility = manifest::audit(previous, &config_hash, cfg.seed, &files);
    let design = json!({
        "estimator": "DML2: out-of-fold residuals pooled across folds, score solved once",
        "score": cfg.score,
        "inference": "normal approximation, 95% interval with z = 1.959964",
        "per_1pct": "coefficient divided by 100 (decimal shift)",
        "fold_mode": cfg.fold_mode,
        "k": cfg.k,
        "means_encoding": {
            "options": cfg.encoding,
            "fitted_on": "each training complement separately",
        },
        "tuning": {
            "method": "k-fold grid search on the base controls, scored by mean out-of-fold MSE",
            "selected": tuned,
        },
        "adf": {
            "regression": "constant, no trend",
            "lags": "Schwert rule floor(12 (n/100)^(1/4))",
            "critical_values": "compiled Monte Carlo table, interpolated in 1/n",
            "level": cfg.level,
        },
        "differencing": "first difference of every macro series",
        "treatment_nonstationary": treatment_nonstationary,
        "dropped_variables": dropped,
        "lag_selection": {
            "setting": cfg.lag_order,
            "used": lag_order,
            "aic_form": "ln det(residual covariance, divisor T - Kp - 1) + 2 (K^2 p + K) / T on a common sample",
            "aic_by_order": aic_table.as_ref().map(|s| s.aic.clone()),
            "effective_obs": aic_table.as_ref().map(|s| s.effective_obs),
        },
        "pca": "eigen-decomposition of the correlation matrix; each loading vector's largest-magnitude entry is positive",
        "correlation_inputs": block.columns(),
    });
    let data = json!({
        "funds_in_file": n_funds_in_file,
        "funds_used": funds.n_cols(),
        "months": funds.n_rows(),
        "first_month": funds.time_index().first().map(ToString::to_string),
        "last_month": funds.time_index().last().map(ToString::to_string),
        "panel_rows": problem.n(),
        "controls": problem.x_names(),
    });
    let m = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config_hash,
        config: serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?,
        rng: RNG_IDENTITY.to_string(),
        design,
        data,
        files,
        reproducibility: reproducibility.clone(),
    };
    manifest::write_manifest(dir, &m)?;

    Ok(PipelineOutcome { output_dir: dir.to_path_buf(), results, lag_order, dropped, reproducibility })
}

/// Effects of a one-percentage-point move, as printed by `run`.
pub fn summary_lines(outcome: &PipelineOutcome) -> Vec<String> {
    outcome
        .results
        .iter()
        .map(|r| {
            format!(
                "{}: coef {:.6} se {:.6} t {:.3} p {:.3e} 95% CI [{:.6}, {:.6}] n {} per 1% {}",
                r.model,
                r.theta,
                r.se,
                r.t,
                r.p,
                r.ci_low,
                r.ci_high,
                r.n,
                rescale_per_1pct(r)
            )
        })
        .collect()
}
