use ndarray::{Array2, Axis};

use super::PreprocessError;
use crate::linalg::{least_squares, log_det_spd};
use crate::panel_data::TimeSeriesMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct VarLagSelection {
    pub order: usize,
    /// `aic[p - 1]` is the criterion for VAR(p).
    pub aic: Vec<f64>,
    pub effective_obs: usize,
}

/// Picks the VAR order in `1..=p_max` minimising
/// `ln det Σ̂_p + 2 (K² p + K) / T_eff` on the common sample that drops the
/// first `p_max` rows. `Σ̂_p` is the OLS residual covariance with the
/// degrees-of-freedom divisor `T_eff − K p − 1`.
pub fn select_lag_var_aic(vars: &TimeSeriesMatrix, p_max: usize) -> Result<VarLagSelection, PreprocessError> {
    if vars.missing_count() > 0 {
        return Err(PreprocessError::MissingValues("VAR lag selection needs a complete block".into()));
    }
    select_lag_dense(&vars.to_dense(), p_max)
}

pub(crate) fn select_lag_dense(data: &Array2<f64>, p_max: usize) -> Result<VarLagSelection, PreprocessError> {
    if p_max == 0 {
        return Err(PreprocessError::InvalidArgument("p_max must be at least 1".into()));
    }
    let (t, k) = data.dim();
    if k == 0 {
        return Err(PreprocessError::InvalidArgument("no columns".into()));
    }
    // the largest model has 1 + K p_max regressors on T - p_max rows
    let required = p_max + k * p_max + 1;
    if t <= required {
        return Err(PreprocessError::InsufficientData { required, actual: t });
    }
    let t_eff = t - p_max;
    let mut aic = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let mut design = Array2::<f64>::zeros((t_eff, 1 + k * p));
        for r in 0..t_eff {
            let time = p_max + r;
            design[[r, 0]] = 1.0;
            for lag in 1..=p {
                for j in 0..k {
                    design[[r, 1 + (lag - 1) * k + j]] = data[[time - lag, j]];
                }
            }
        }
        let mut resid = Array2::<f64>::zeros((t_eff, k));
        for j in 0..k {
            let target = data.slice(ndarray::s![p_max.., j]);
            let fit = least_squares(design.view(), target).map_err(|_| PreprocessError::SingularCovariance)?;
            resid.index_axis_mut(Axis(1), j).assign(&fit.residuals);
        }
        let sigma = resid.t().dot(&resid) / (t_eff - 1 - k * p) as f64;
        let ld = log_det_spd(sigma.view()).ok_or(PreprocessError::SingularCovariance)?;
        let penalty = 2.0 * ((k * k * p + k) as f64) / t_eff as f64;
        aic.push(ld + penalty);
    }
    let mut order = 1;
    for (i, v) in aic.iter().enumerate() {
        if *v < aic[order - 1] {
            order = i + 1;
        }
    }
    Ok(VarLagSelection { order, aic, effective_obs: t_eff })
}
