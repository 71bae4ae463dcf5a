//! Synthetic data with known ground truth: partially linear problems, VAR
//! processes, unit-root series, Monte Carlo Dickey–Fuller critical values
//! and a small fund-panel fixture.

mod critical;
mod fixture;
mod plr;
mod unit_root;
mod var;

pub use critical::{df_critical_values, df_t_ratio, MIN_CRITICAL_REPS};
pub use fixture::{write_panel_fixture, FixtureFiles, FixtureSpec};
pub use plr::{gen_plr, population_r2, SyntheticPlr};
pub use unit_root::gen_unit_root;
pub use var::{companion_spectral_radius, gen_var};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthKind {
    PlrLinear,
    PlrNonlinear,
    Var,
    RandomWalk,
    WhiteNoise,
    Ar1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub theta_true: f64,
    pub n: usize,
    pub k_controls: usize,
    pub noise_sd: f64,
    pub seed: u64,
    /// `A_1 … A_p` for `Var`.
    pub var_coefficients: Vec<Array2<f64>>,
    /// AR coefficient for `Ar1`.
    pub phi: f64,
}

impl SynthSpec {
    pub fn new(kind: SynthKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            theta_true: 0.5,
            n,
            k_controls: 5,
            noise_sd: 1.0,
            seed,
            var_coefficients: Vec::new(),
            phi: 0.0,
        }
    }

    pub fn plr(kind: SynthKind, theta_true: f64, n: usize, seed: u64) -> Self {
        Self { theta_true, ..Self::new(kind, n, seed) }
    }

    pub fn var(coefficients: Vec<Array2<f64>>, n: usize, seed: u64) -> Self {
        let k = coefficients.first().map_or(0, |a| a.nrows());
        Self { var_coefficients: coefficients, k_controls: k, ..Self::new(SynthKind::Var, n, seed) }
    }

    pub fn ar1(phi: f64, n: usize, seed: u64) -> Self {
        Self { phi, ..Self::new(SynthKind::Ar1, n, seed) }
    }

    fn check_common(&self) -> Result<(), SynthError> {
        if self.n == 0 {
            return Err(SynthError::InvalidSpec("n must be at least 1".into()));
        }
        if !(self.noise_sd > 0.0) || !self.noise_sd.is_finite() {
            return Err(SynthError::InvalidSpec("noise_sd must be positive".into()));
        }
        Ok(())
    }
}

/// The strongly identified K = 2 VAR(2) used for lag-order checks.
pub fn reference_var2() -> Vec<Array2<f64>> {
    vec![
        ndarray::array![[0.5, 0.1], [0.0, 0.4]],
        ndarray::array![[-0.4, 0.0], [0.2, -0.3]],
    ]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("generator does not handle kind {0:?}")]
    BadKind(SynthKind),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("VAR coefficients are explosive (companion spectral radius {0:.4} >= 1)")]
    ExplosiveCoefficients(f64),
    #[error("AR coefficient {0} is outside (-1, 1)")]
    BadPhi(f64),
    #[error("need at least {required} replications, got {actual}")]
    TooFewReps { required: usize, actual: usize },
    #[error("series length {0} is below 25")]
    TooShort(usize),
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}
