use ndarray::{Array1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{plr_estimate, DmlError, DmlResult, PlrProblem, Score, Task};
use crate::learners::{grouped_kfold_split, kfold_split, r2, Learner};
use crate::preprocess::{EncodingOptions, MeansEncoder};
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FoldMode {
    /// Rows are shuffled into folds independently.
    #[default]
    Row,
    /// All rows of a unit land in the same fold.
    #[serde(alias = "unit")]
    UnitBlocked,
    /// All rows of a period land in the same fold, so a treatment shared by
    /// every unit in a month is never learned from that month.
    #[serde(alias = "time")]
    TimeBlocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    #[default]
    CrossFit,
    /// Nuisances fitted and evaluated on all rows. Not valid for inference;
    /// kept for the Frisch–Waugh–Lovell check.
    NoSplitDebug,
}

/// Learners for the y-task and the d-task.
#[derive(Clone, Copy)]
pub struct NuisanceLearners<'a> {
    pub outcome: &'a dyn Learner,
    pub treatment: &'a dyn Learner,
}

impl<'a> NuisanceLearners<'a> {
    pub fn both(learner: &'a dyn Learner) -> Self {
        Self { outcome: learner, treatment: learner }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmlOptions {
    pub k: usize,
    pub seed: u64,
    pub fold_mode: FoldMode,
    /// Per-unit means appended to X, learned on each training complement.
    pub encoding: EncodingOptions,
    pub score: Score,
    pub mode: RunMode,
}

impl Default for DmlOptions {
    fn default() -> Self {
        Self {
            k: 2,
            seed: 0,
            fold_mode: FoldMode::Row,
            encoding: EncodingOptions { regressor_means: false, outcome_mean: false },
            score: Score::Orthogonal,
            mode: RunMode::CrossFit,
        }
    }
}

/// Out-of-fold nuisance predictions and residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceResiduals {
    /// `y − ĝ(X)`.
    pub u: Array1<f64>,
    /// `d − m̂(X)`.
    pub v: Array1<f64>,
    pub g_hat: Array1<f64>,
    pub m_hat: Array1<f64>,
    pub fold_of: Vec<usize>,
    pub r2_y: f64,
    pub r2_d: f64,
    pub mode: RunMode,
}

struct FoldFit {
    rows: Vec<usize>,
    g: Array1<f64>,
    m: Array1<f64>,
}

fn fit_fold(
    problem: &PlrProblem,
    learners: NuisanceLearners<'_>,
    opts: &DmlOptions,
    fold: usize,
    train: &[usize],
    eval: &[usize],
) -> Result<FoldFit, DmlError> {
    let x = problem.x().view();
    let (x_train, x_eval) = if opts.encoding.is_active() {
        let enc = MeansEncoder::fit(
            problem.units(),
            problem.n_units(),
            x,
            problem.y().view(),
            train,
            problem.encoded_columns(),
            opts.encoding,
        )
        .map_err(DmlError::Encoding)?;
        (enc.transform(problem.units(), x, train), enc.transform(problem.units(), x, eval))
    } else {
        (x.select(Axis(0), train), x.select(Axis(0), eval))
    };
    let y_train = problem.y().select(Axis(0), train);
    let d_train = problem.d().select(Axis(0), train);
    let tag = |task: u64| derive_seed(opts.seed, 2 * fold as u64 + task);
    let wrap = |task| move |source| DmlError::Learner { fold, task, source };
    let g = learners
        .outcome
        .fit(x_train.view(), y_train.view(), tag(1))
        .and_then(|p| p.predict(x_eval.view()))
        .map_err(wrap(Task::Outcome))?;
    let m = learners
        .treatment
        .fit(x_train.view(), d_train.view(), tag(2))
        .and_then(|p| p.predict(x_eval.view()))
        .map_err(wrap(Task::Treatment))?;
    Ok(FoldFit { rows: eval.to_vec(), g, m })
}

/// Fits ĝ and m̂ on each fold's complement and predicts the fold.
pub fn cross_fit_nuisance(
    problem: &PlrProblem,
    learners: NuisanceLearners<'_>,
    opts: &DmlOptions,
) -> Result<NuisanceResiduals, DmlError> {
    let n = problem.n();
    let folds: Vec<Vec<usize>> = match opts.mode {
        RunMode::NoSplitDebug => vec![(0..n).collect()],
        RunMode::CrossFit => match opts.fold_mode {
            FoldMode::Row => kfold_split(n, opts.k, opts.seed),
            FoldMode::UnitBlocked => grouped_kfold_split(problem.units(), opts.k, opts.seed),
            FoldMode::TimeBlocked => grouped_kfold_split(problem.periods(), opts.k, opts.seed),
        }
        .map_err(DmlError::Folds)?,
    };
    let mut fold_of = vec![0usize; n];
    for (f, fold) in folds.iter().enumerate() {
        for &r in fold {
            fold_of[r] = f;
        }
    }
    let fits = folds
        .par_iter()
        .enumerate()
        .map(|(f, eval)| {
            let train: Vec<usize> = match opts.mode {
                RunMode::NoSplitDebug => eval.clone(),
                RunMode::CrossFit => (0..n).filter(|&r| fold_of[r] != f).collect(),
            };
            fit_fold(problem, learners, opts, f, &train, eval)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut g_hat = Array1::<f64>::zeros(n);
    let mut m_hat = Array1::<f64>::zeros(n);
    for fit in &fits {
        for (i, &r) in fit.rows.iter().enumerate() {
            g_hat[r] = fit.g[i];
            m_hat[r] = fit.m[i];
        }
    }
    let u = problem.y() - &g_hat;
    let v = problem.d() - &m_hat;
    let r2_of = |truth: &Array1<f64>, pred: &Array1<f64>| {
        r2(truth.as_slice().expect("contiguous"), pred.as_slice().expect("contiguous")).unwrap_or(f64::NAN)
    };
    Ok(NuisanceResiduals {
        r2_y: r2_of(problem.y(), &g_hat),
        r2_d: r2_of(problem.d(), &m_hat),
        u,
        v,
        g_hat,
        m_hat,
        fold_of,
        mode: opts.mode,
    })
}

/// Cross-fits the nuisances and solves the score. The result is labelled
/// with the outcome learner's name.
pub fn run_dml(
    problem: &PlrProblem,
    learners: NuisanceLearners<'_>,
    opts: &DmlOptions,
) -> Result<(DmlResult, NuisanceResiduals), DmlError> {
    let res = cross_fit_nuisance(problem, learners, opts)?;
    let result = plr_estimate(&res, problem.d().view(), problem.y().view(), opts.score, &learners.outcome.name())?;
    Ok((result, res))
}

