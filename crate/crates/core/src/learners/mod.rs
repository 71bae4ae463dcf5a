//! Supervised learners used as nuisance estimators, written from scratch:
//! OLS by Householder QR and squared-error gradient-boosted regression
//! trees with exact greedy splits. Also k-fold splitting, grid search and
//! the MSE / R² metrics.

mod cv;
mod gbt;
mod metrics;
mod ols;

pub use cv::{
    default_grid, grid_search_cv, grouped_kfold_split, kfold_split, read_grid_json, write_grid_csv,
    CandidateScore, GridSearch,
};
pub use gbt::{gbt_fit, GbtModel, HyperParams, Node, RegressionTree};
pub use metrics::{mse, r2};
pub use ols::{ols_fit, LinearModel};

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LearnerError {
    #[error("need more than {required} rows, got {rows}")]
    TooFewRows { rows: usize, required: usize },
    #[error("design matrix is rank deficient (feature {feature} is collinear)")]
    RankDeficient { feature: usize },
    #[error("model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("target is constant, R² undefined")]
    ConstantTarget,
    #[error("empty input")]
    EmptyInput,
    #[error("fold count {k} invalid for {n} items (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("every grid candidate failed; first error: {0}")]
    AllCandidatesFailed(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("bad grid document: {0}")]
    GridFormat(String),
}

/// Anything that maps a feature matrix to predictions.
pub trait Predictor: Send + Sync {
    fn n_features(&self) -> usize;
    fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, LearnerError>;
}

/// A recipe for fitting a [`Predictor`]. This is the plug point for DML
/// nuisance models.
pub trait Learner: Send + Sync {
    fn fit(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, seed: u64) -> Result<Box<dyn Predictor>, LearnerError>;
    fn name(&self) -> String;
}

/// The two built-in learners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Linear,
    Boosted(HyperParams),
}

impl Learner for LearnerSpec {
    fn fit(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, seed: u64) -> Result<Box<dyn Predictor>, LearnerError> {
        Ok(match self {
            LearnerSpec::Linear => Box::new(ols_fit(x, y)?),
            LearnerSpec::Boosted(params) => Box::new(gbt_fit(x, y, params, seed)?),
        })
    }

    fn name(&self) -> String {
        match self {
            LearnerSpec::Linear => "Linear Regression".to_string(),
            LearnerSpec::Boosted(_) => "Gradient Boosting".to_string(),
        }
    }
}

fn check_features(expected: usize, found: usize) -> Result<(), LearnerError> {
    if expected != found {
        return Err(LearnerError::DimensionMismatch { expected, found });
    }
    Ok(())
}
