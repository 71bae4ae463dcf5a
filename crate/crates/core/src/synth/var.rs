use ndarray::Array2;
use rand_distr::{Distribution, Normal};

use super::{SynthError, SynthKind, SynthSpec};
use crate::panel_data::{Month, TimeSeriesMatrix};
use crate::rng::stream;

const BURN_IN: usize = 200;

/// Largest eigenvalue modulus of the VAR companion matrix.
pub fn companion_spectral_radius(coefficients: &[Array2<f64>]) -> f64 {
    let p = coefficients.len();
    if p == 0 {
        return 0.0;
    }
    let k = coefficients[0].nrows();
    let dim = k * p;
    let mut c = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for (j, a) in coefficients.iter().enumerate() {
        for r in 0..k {
            for s in 0..k {
                c[(r, j * k + s)] = a[[r, s]];
            }
        }
    }
    for r in k..dim {
        c[(r, r - k)] = 1.0;
    }
    c.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Simulates `x_t = Σ A_j x_{t−j} + ε_t` from zero, discards 200 steps of
/// burn-in and returns `n` rows named `x1 … xK` starting January 2000.
pub fn gen_var(spec: &SynthSpec) -> Result<TimeSeriesMatrix, SynthError> {
    spec.check_common()?;
    if spec.kind != SynthKind::Var {
        return Err(SynthError::BadKind(spec.kind));
    }
    let coefs = &spec.var_coefficients;
    let Some(first) = coefs.first() else {
        return Err(SynthError::InvalidSpec("VAR needs at least one coefficient matrix".into()));
    };
    let k = first.nrows();
    if k == 0 || coefs.iter().any(|a| a.dim() != (k, k)) {
        return Err(SynthError::InvalidSpec("coefficient matrices must all be K×K".into()));
    }
    let radius = companion_spectral_radius(coefs);
    if !(radius < 1.0) {
        return Err(SynthError::ExplosiveCoefficients(radius));
    }
    let p = coefs.len();
    let total = BURN_IN + spec.n;
    let noise = Normal::new(0.0, spec.noise_sd).expect("positive sd");
    let mut rng = stream(spec.seed);
    let mut x = Array2::<f64>::zeros((total, k));
    for t in 0..total {
        for i in 0..k {
            let mut v: f64 = noise.sample(&mut rng);
            for (j, a) in coefs.iter().enumerate().take(p) {
                if t > j {
                    v += (0..k).map(|s| a[[i, s]] * x[[t - j - 1, s]]).sum::<f64>();
                }
            }
            x[[t, i]] = v;
        }
    }
    let names = (1..=k).map(|i| format!("x{i}")).collect();
    let values = (0..k).map(|i| (BURN_IN..total).map(|t| Some(x[[t, i]])).collect()).collect();
    TimeSeriesMatrix::from_start(Month::new(2000, 1).expect("valid month"), names, values)
        .map_err(|e| SynthError::InvalidSpec(e.to_string()))
}
