use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{check_features, LearnerError, Predictor};
use crate::linalg::{least_squares, with_intercept, LinalgError};

/// Fitted `y ≈ intercept + X·coefficients`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Array1<f64>,
}

/// Ordinary least squares with an intercept, solved by Householder QR.
pub fn ols_fit(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<LinearModel, LearnerError> {
    let (n, k) = x.dim();
    if y.len() != n {
        return Err(LearnerError::LengthMismatch { left: n, right: y.len() });
    }
    if n <= k + 1 {
        return Err(LearnerError::TooFewRows { rows: n, required: k + 1 });
    }
    let design = with_intercept(x);
    let ls = least_squares(design.view(), y).map_err(|e| match e {
        LinalgError::RankDeficient { column } => LearnerError::RankDeficient { feature: column.saturating_sub(1) },
        LinalgError::Underdetermined { rows, cols } => LearnerError::TooFewRows { rows, required: cols },
        LinalgError::DimensionMismatch(_) => LearnerError::LengthMismatch { left: n, right: y.len() },
    })?;
    Ok(LinearModel { intercept: ls.coefficients[0], coefficients: ls.coefficients.slice(ndarray::s![1..]).to_owned() })
}

impl Predictor for LinearModel {
    fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, LearnerError> {
        check_features(self.coefficients.len(), x.ncols())?;
        Ok(x.dot(&self.coefficients) + self.intercept)
    }
}
