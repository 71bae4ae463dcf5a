use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{compiled_critical_values, CriticalValues, PreprocessError};
use crate::linalg::{least_squares, LinalgError};

/// Minimum series length accepted by [`adf_test`].
pub const MIN_ADF_LENGTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum SignificanceLevel {
    #[serde(rename = "1%")]
    OnePct,
    #[default]
    #[serde(rename = "5%")]
    FivePct,
    #[serde(rename = "10%")]
    TenPct,
}

impl std::fmt::Display for SignificanceLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SignificanceLevel::OnePct => "1%",
            SignificanceLevel::FivePct => "5%",
            SignificanceLevel::TenPct => "10%",
        })
    }
}

impl std::str::FromStr for SignificanceLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().trim_end_matches('%') {
            "1" | "0.01" => Ok(SignificanceLevel::OnePct),
            "5" | "0.05" => Ok(SignificanceLevel::FivePct),
            "10" | "0.1" | "0.10" => Ok(SignificanceLevel::TenPct),
            other => Err(format!("unknown significance level `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LagChoice {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stationary,
    NonStationary,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stationary => "Stationary",
            Verdict::NonStationary => "NonStationary",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdfReport {
    pub statistic: f64,
    pub lag_order: usize,
    pub nobs: usize,
    pub critical_values: CriticalValues,
    pub level: SignificanceLevel,
    pub verdict: Verdict,
}

/// Schwert's rule of thumb, `floor(12 (n/100)^{1/4})`.
pub fn schwert_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Augmented Dickey–Fuller test with a constant and no trend.
///
/// Regresses `Δy_t` on `1, y_{t−1}, Δy_{t−1}, …, Δy_{t−k}` and reports the
/// t-ratio of the `y_{t−1}` coefficient.
pub fn adf_test(series: &[f64], level: SignificanceLevel, lags: LagChoice) -> Result<AdfReport, PreprocessError> {
    let n = series.len();
    if n < MIN_ADF_LENGTH {
        return Err(PreprocessError::TooShort { required: MIN_ADF_LENGTH, actual: n });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(PreprocessError::InvalidArgument("series contains non-finite values".into()));
    }
    let k = match lags {
        LagChoice::Auto => schwert_lag(n),
        LagChoice::Fixed(k) => k,
    };
    let dy: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    // dy[i] = y[i+1] - y[i]; the regression row for dy[i] needs dy[i-1..i-k]
    let cols = k + 2;
    let rows = dy.len().saturating_sub(k);
    if rows <= cols {
        return Err(PreprocessError::TooShort { required: n + cols + 1 - rows, actual: n });
    }
    let mut a = Array2::<f64>::zeros((rows, cols));
    let mut target = Array1::<f64>::zeros(rows);
    for (r, i) in (k..dy.len()).enumerate() {
        target[r] = dy[i];
        a[[r, 0]] = 1.0;
        a[[r, 1]] = series[i];
        for j in 1..=k {
            a[[r, 1 + j]] = dy[i - j];
        }
    }
    let fit = least_squares(a.view(), target.view()).map_err(|e| match e {
        LinalgError::Underdetermined { .. } => PreprocessError::TooShort { required: n + 1, actual: n },
        _ => PreprocessError::SingularRegression,
    })?;
    let dof = (rows - cols) as f64;
    let s2 = fit.rss() / dof;
    let se = (s2 * fit.xtx_inv_diag()[1]).sqrt();
    let scale = target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(se > 1e-12 * scale.max(f64::MIN_POSITIVE)) || !se.is_finite() {
        return Err(PreprocessError::SingularRegression);
    }
    let statistic = fit.coefficients[1] / se;
    let critical_values = compiled_critical_values(n);
    let verdict = if statistic < critical_values.at(level) { Verdict::Stationary } else { Verdict::NonStationary };
    Ok(AdfReport { statistic, lag_order: k, nobs: rows, critical_values, level, verdict })
}
