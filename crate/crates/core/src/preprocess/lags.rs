use crate::panel_data::TimeSeriesMatrix;

/// `out[t] = series[t − j]`, missing for the first `j` entries.
pub fn lag_series(series: &[Option<f64>], j: usize) -> Vec<Option<f64>> {
    let n = series.len();
    (0..n).map(|t| if t >= j { series[t - j] } else { None }).collect()
}

/// Appends `{var}_lag1 … {var}_lag{p}` for every column. Rows whose lag
/// window is incomplete carry missing values in the lag columns.
pub fn build_lags(m: &TimeSeriesMatrix, p: usize) -> TimeSeriesMatrix {
    let mut out = m.clone();
    for (name, col) in m.iter_columns() {
        for j in 1..=p {
            out.push_column(format!("{name}_lag{j}"), lag_series(col, j))
                .expect("lag column names are fresh and lengths match");
        }
    }
    out
}
