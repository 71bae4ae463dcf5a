//! Dickey–Fuller critical values for the constant-only test regression.
//!
//! The table below was produced by `synth::df_critical_values` (see the
//! `gen_critical_values` example, 200,000 replications per length; the
//! output is kept in `data/df_critical_values.csv`) and is interpolated
//! linearly in `1/n`.

use super::SignificanceLevel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub one_pct: f64,
    pub five_pct: f64,
    pub ten_pct: f64,
}

impl CriticalValues {
    pub fn at(&self, level: SignificanceLevel) -> f64 {
        match level {
            SignificanceLevel::OnePct => self.one_pct,
            SignificanceLevel::FivePct => self.five_pct,
            SignificanceLevel::TenPct => self.ten_pct,
        }
    }
}

/// `(n, [1%, 5%, 10%])`; `n = None` is the large-sample limit.
pub const COMPILED_TABLE: [(Option<usize>, [f64; 3]); 5] = [
    (Some(50), [-3.5678, -2.9188, -2.5967]),
    (Some(100), [-3.4913, -2.8928, -2.5843]),
    (Some(250), [-3.4622, -2.8760, -2.5748]),
    (Some(500), [-3.4316, -2.8600, -2.5699]),
    (None, [-3.4201, -2.8562, -2.5653]),
];

/// Critical values for a series of length `n`, interpolated linearly in
/// `1/n`; below the smallest tabulated `n` the first segment is extended.
pub fn compiled_critical_values(n: usize) -> CriticalValues {
    let x = 1.0 / n.max(1) as f64;
    let points: Vec<(f64, [f64; 3])> =
        COMPILED_TABLE.iter().map(|&(n, v)| (n.map_or(0.0, |n| 1.0 / n as f64), v)).collect();
    // points run from large 1/n to 0; find the bracketing segment
    let seg = points
        .windows(2)
        .position(|w| x <= w[0].0 && x >= w[1].0)
        .unwrap_or(0);
    let (x0, v0) = points[seg];
    let (x1, v1) = points[seg + 1];
    let w = (x - x1) / (x0 - x1);
    let lerp = |i: usize| v1[i] + w * (v0[i] - v1[i]);
    CriticalValues { one_pct: lerp(0), five_pct: lerp(1), ten_pct: lerp(2) }
}
