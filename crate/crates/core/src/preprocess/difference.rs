use super::PreprocessError;
use crate::panel_data::TimeSeriesMatrix;

/// `out[i] = series[i + 1] − series[i]`.
pub fn first_difference(series: &[f64]) -> Result<Vec<f64>, PreprocessError> {
    if series.len() < 2 {
        return Err(PreprocessError::TooShort { required: 2, actual: series.len() });
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Column-wise first differences on the original time index: the value at
/// month `t` is `x[t] − x[t−1]`, missing when either side is missing. The
/// first month is always missing.
pub fn difference_matrix(m: &TimeSeriesMatrix) -> TimeSeriesMatrix {
    m.map_columns(|col| {
        std::iter::once(None)
            .chain(col.windows(2).map(|w| match (w[0], w[1]) {
                (Some(a), Some(b)) => Some(b - a),
                _ => None,
            }))
            .take(col.len())
            .collect()
    })
}
