use super::LearnerError;

fn check(y: &[f64], yhat: &[f64], min_len: usize) -> Result<(), LearnerError> {
    if y.len() != yhat.len() {
        return Err(LearnerError::LengthMismatch { left: y.len(), right: yhat.len() });
    }
    if y.len() < min_len {
        return Err(LearnerError::EmptyInput);
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64, LearnerError> {
    check(y, yhat, 1)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

/// Coefficient of determination `1 − SS_res / SS_tot`; negative when the
/// predictions are worse than the mean.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64, LearnerError> {
    check(y, yhat, 2)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(LearnerError::ConstantTarget);
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - ss_res / ss_tot)
}
