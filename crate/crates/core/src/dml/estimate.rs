use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use super::{DmlError, NuisanceResiduals};
use crate::stats::{two_sided_p, Z_975};

/// Which moment condition is solved for θ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Score {
    /// `θ = Σ v (y − ĝ) / Σ v d`.
    #[default]
    Orthogonal,
    /// Residual-on-residual regression, `θ = Σ v u / Σ v²`.
    PartiallingOut,
}

impl std::fmt::Display for Score {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Score::Orthogonal => "orthogonal",
            Score::PartiallingOut => "partialling_out",
        })
    }
}

/// One inference row: coefficient, standard error, t, p and 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmlResult {
    pub model: String,
    pub theta: f64,
    pub se: f64,
    pub t: f64,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub per_1pct: f64,
}

impl DmlResult {
    /// Fills in t, p, the normal 95% interval and the per-1% effect.
    pub fn from_estimate(model: impl Into<String>, theta: f64, se: f64, n: usize) -> Self {
        let t = theta / se;
        let mut out = Self {
            model: model.into(),
            theta,
            se,
            t,
            p: two_sided_p(t),
            ci_low: theta - Z_975 * se,
            ci_high: theta + Z_975 * se,
            n,
            per_1pct: 0.0,
        };
        out.per_1pct = rescale_per_1pct(&out);
        out
    }

    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// The coefficient per one percentage point, `θ / 100`.
///
/// Shifts the decimal point of θ's shortest round-trip representation, so
/// a printed coefficient such as `-0.019` maps to the double nearest
/// `-0.00019` (plain division can land one ulp away).
pub fn rescale_per_1pct(result: &DmlResult) -> f64 {
    shift_decimal(result.theta, -2)
}

fn shift_decimal(x: f64, places: i32) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x / 10f64.powi(-places);
    }
    let repr = format!("{x:e}");
    let (mantissa, exp) = repr.split_once('e').expect("`{:e}` always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}", exp + places).parse().expect("valid float literal")
}

/// Solves the chosen score on pooled out-of-fold residuals and computes
/// the sandwich standard error `√(mean ψ² / (n J²))`.
pub fn plr_estimate(
    res: &NuisanceResiduals,
    d: ArrayView1<f64>,
    y: ArrayView1<f64>,
    score: Score,
    model: &str,
) -> Result<DmlResult, DmlError> {
    let n = res.v.len();
    if d.len() != n || y.len() != n || res.u.len() != n || res.g_hat.len() != n {
        return Err(DmlError::LengthMismatch(format!(
            "residuals {n}, d {}, y {}, u {}, ĝ {}",
            d.len(),
            y.len(),
            res.u.len(),
            res.g_hat.len()
        )));
    }
    let nf = n as f64;
    let v = &res.v;
    let svv: f64 = v.dot(v);
    let scale = d.dot(&d).max(f64::MIN_POSITIVE);
    if !(svv > 1e-12 * scale) {
        return Err(DmlError::DegenerateTreatment);
    }
    // rows of (score numerator term, Jacobian term)
    let (theta, j) = match score {
        Score::Orthogonal => {
            let svd: f64 = v.dot(&d);
            if svd.abs() <= 1e-12 * scale {
                return Err(DmlError::DegenerateTreatment);
            }
            let num: f64 = (0..n).map(|i| v[i] * (y[i] - res.g_hat[i])).sum();
            (num / svd, svd / nf)
        }
        Score::PartiallingOut => (v.dot(&res.u) / svv, svv / nf),
    };
    let psi2: f64 = match score {
        Score::Orthogonal => (0..n).map(|i| ((y[i] - res.g_hat[i] - theta * d[i]) * v[i]).powi(2)).sum(),
        Score::PartiallingOut => (0..n).map(|i| ((res.u[i] - theta * v[i]) * v[i]).powi(2)).sum(),
    };
    let se = (psi2 / nf / (nf * j * j)).sqrt();
    if !(se > 0.0) || !se.is_finite() {
        return Err(DmlError::DegenerateTreatment);
    }
    Ok(DmlResult::from_estimate(model, theta, se, n))
}
