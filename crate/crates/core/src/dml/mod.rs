//! Cross-fitted double machine learning for the partially linear model
//! `y = θ d + g(X) + u`, `d = m(X) + v`.

mod crossfit;
mod diagnostics;
mod estimate;
mod io;
mod problem;

pub use crossfit::{cross_fit_nuisance, run_dml, DmlOptions, FoldMode, NuisanceLearners, NuisanceResiduals, RunMode};
pub use diagnostics::{residual_diagnostics, ResidualDiagnostics};
pub use estimate::{plr_estimate, rescale_per_1pct, DmlResult, Score};
pub use io::{write_residuals_csv, write_results_csv, RESULTS_HEADER};
pub use problem::PlrProblem;

use crate::learners::LearnerError;
use crate::preprocess::PreprocessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Outcome,
    Treatment,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Outcome => "y-task",
            Task::Treatment => "d-task",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DmlError {
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("treatment is constant")]
    ConstantTreatment,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("treatment residuals are degenerate (Σv² or Σvd is zero)")]
    DegenerateTreatment,
    #[error("fold {fold}, {task}: {source}")]
    Learner {
        fold: usize,
        task: Task,
        #[source]
        source: LearnerError,
    },
    #[error("fold split: {0}")]
    Folds(LearnerError),
    #[error("means-encoding: {0}")]
    Encoding(PreprocessError),
}
