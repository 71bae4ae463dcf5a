use rayon::prelude::*;
use rand_distr::{Distribution, StandardNormal};

use super::SynthError;
use crate::preprocess::CriticalValues;
use crate::rng::{derive_seed, stream};
use crate::stats::quantile_sorted;

pub const MIN_CRITICAL_REPS: usize = 10_000;

/// Dickey–Fuller t-ratio from the simple regression of `Δy_t` on a
/// constant and `y_{t−1}`, in closed form.
pub fn df_t_ratio(y: &[f64]) -> f64 {
    let m = y.len() - 1;
    let nf = m as f64;
    let lag = &y[..m];
    let mx = lag.iter().sum::<f64>() / nf;
    let my = (y[m] - y[0]) / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for t in 0..m {
        let dx = lag[t] - mx;
        sxx += dx * dx;
        sxy += dx * (y[t + 1] - y[t] - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = (0..m).map(|t| (y[t + 1] - y[t] - a - b * lag[t]).powi(2)).sum();
    b / (rss / (nf - 2.0) / sxx).sqrt()
}

/// Empirical 1%, 5% and 10% quantiles of the Dickey–Fuller statistic for a
/// driftless Gaussian random walk of length `n`. Replication `i` draws from
/// the stream seeded by `derive_seed(seed, i)`.
pub fn df_critical_values(n: usize, reps: usize, seed: u64) -> Result<CriticalValues, SynthError> {
    if reps < MIN_CRITICAL_REPS {
        return Err(SynthError::TooFewReps { required: MIN_CRITICAL_REPS, actual: reps });
    }
    if n < 25 {
        return Err(SynthError::TooShort(n));
    }
    let mut stats: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |y, i| {
                let mut rng = stream(derive_seed(seed, i));
                let mut level = 0.0;
                for v in y.iter_mut() {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    level += e;
                    *v = level;
                }
                df_t_ratio(y)
            },
        )
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok(CriticalValues {
        one_pct: quantile_sorted(&stats, 0.01),
        five_pct: quantile_sorted(&stats, 0.05),
        ten_pct: quantile_sorted(&stats, 0.10),
    })
}
