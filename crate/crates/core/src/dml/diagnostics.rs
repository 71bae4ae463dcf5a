use super::DmlError;

/// Data behind a residuals-versus-fitted plot.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDiagnostics {
    /// `(fitted, residual)` per row.
    pub pairs: Vec<(f64, f64)>,
    pub max_abs: f64,
    /// Share of residuals within one standard deviation of zero.
    pub frac_within_1sd: f64,
}

pub fn residual_diagnostics(residuals: &[f64], fitted: &[f64]) -> Result<ResidualDiagnostics, DmlError> {
    if residuals.len() != fitted.len() {
        return Err(DmlError::LengthMismatch(format!(
            "{} residuals, {} fitted values",
            residuals.len(),
            fitted.len()
        )));
    }
    let n = residuals.len();
    let pairs: Vec<(f64, f64)> = fitted.iter().copied().zip(residuals.iter().copied()).collect();
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let frac_within_1sd = if n == 0 {
        0.0
    } else {
        let sd = crate::stats::variance(residuals).sqrt();
        residuals.iter().filter(|r| r.abs() <= sd).count() as f64 / n as f64
    };
    Ok(ResidualDiagnostics { pairs, max_abs, frac_within_1sd })
}
