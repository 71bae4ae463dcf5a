use ndarray::{Array1, Array2};
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{SynthError, SynthKind, SynthSpec};
use crate::dml::PlrProblem;
use crate::rng::stream;

#[derive(Debug, Clone)]
pub struct SyntheticPlr {
    pub problem: PlrProblem,
    pub theta_true: f64,
}

/// Loadings `a = b = (1, 1/2, 1/4, …)`.
fn loadings(k: usize) -> Array1<f64> {
    (0..k).map(|j| 0.5f64.powi(j as i32)).collect()
}

/// Draws `X` (row-major), then `v`, then `u` from one stream.
///
/// * `PlrLinear`: `d = X a + v`, `y = θ d + X b + u`.
/// * `PlrNonlinear`: `d = sin(X a) + (X₁² − 1)/2 + v`,
///   `y = θ d + cos(X b) + X₂ X₃ + u`.
pub fn gen_plr(spec: &SynthSpec) -> Result<SyntheticPlr, SynthError> {
    spec.check_common()?;
    let nonlinear = match spec.kind {
        SynthKind::PlrLinear => false,
        SynthKind::PlrNonlinear => true,
        other => return Err(SynthError::BadKind(other)),
    };
    let (n, k) = (spec.n, spec.k_controls);
    if k == 0 || (nonlinear && k < 3) {
        return Err(SynthError::InvalidSpec(format!("k_controls = {k} is too small for {:?}", spec.kind)));
    }
    let mut rng = stream(spec.seed);
    let x = Array2::from_shape_simple_fn((n, k), || StandardNormal.sample(&mut rng));
    let noise = Normal::new(0.0, spec.noise_sd).expect("positive sd");
    let v: Array1<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    let u: Array1<f64> = (0..n).map(|_| noise.sample(&mut rng)).collect();
    let a = loadings(k);
    let xa = x.dot(&a);
    let (m, g) = if nonlinear {
        let m = Array1::from_shape_fn(n, |i| xa[i].sin() + 0.5 * (x[[i, 0]].powi(2) - 1.0));
        let g = Array1::from_shape_fn(n, |i| xa[i].cos() + x[[i, 1]] * x[[i, 2]]);
        (m, g)
    } else {
        (xa.clone(), xa)
    };
    let d = &m + &v;
    let y = spec.theta_true * &d + &g + &u;
    let problem = PlrProblem::iid(y, d, x).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok(SyntheticPlr { problem, theta_true: spec.theta_true })
}

/// Population R² of the y-task and d-task for `PlrLinear`.
pub fn population_r2(spec: &SynthSpec) -> Option<(f64, f64)> {
    if spec.kind != SynthKind::PlrLinear {
        return None;
    }
    let a = loadings(spec.k_controls);
    let s2 = spec.noise_sd * spec.noise_sd;
    let var_xa = a.dot(&a);
    let r2_d = var_xa / (var_xa + s2);
    // y = X (θ a + b) + θ v + u
    let coef = (spec.theta_true + 1.0) * &a;
    let signal = coef.dot(&coef);
    let th = spec.theta_true;
    let r2_y = signal / (signal + (th * th + 1.0) * s2);
    Some((r2_y, r2_d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let s = SynthSpec::plr(SynthKind::PlrNonlinear, 0.5, 300, 9);
        let a = gen_plr(&s).unwrap();
        let b = gen_plr(&s).unwrap();
        assert_eq!(a.problem, b.problem);
        let c = gen_plr(&SynthSpec { seed: 10, ..s }).unwrap();
        assert_ne!(a.problem.y(), c.problem.y());
    }

    #[test]
    fn bad_kind_and_shape() {
        assert_eq!(gen_plr(&SynthSpec::new(SynthKind::Var, 10, 0)).unwrap_err(), SynthError::BadKind(SynthKind::Var));
        let s = SynthSpec { k_controls: 2, ..SynthSpec::plr(SynthKind::PlrNonlinear, 0.5, 10, 0) };
        assert!(matches!(gen_plr(&s), Err(SynthError::InvalidSpec(_))));
        let s = SynthSpec { noise_sd: 0.0, ..SynthSpec::plr(SynthKind::PlrLinear, 0.5, 10, 0) };
        assert!(matches!(gen_plr(&s), Err(SynthError::InvalidSpec(_))));
    }

    #[test]
    fn linear_structure_holds() {
        let s = SynthSpec { noise_sd: 1e-9, ..SynthSpec::plr(SynthKind::PlrLinear, 0.0, 50, 3) };
        let p = gen_plr(&s).unwrap().problem;
        let a = loadings(5);
        let xa = p.x().dot(&a);
        for i in 0..50 {
            assert!((p.d()[i] - xa[i]).abs() < 1e-7);
            assert!((p.y()[i] - xa[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn population_r2_values() {
        let (ry, rd) = population_r2(&SynthSpec::plr(SynthKind::PlrLinear, 0.5, 10, 0)).unwrap();
        let va: f64 = (0..5).map(|j| 0.25f64.powi(j)).sum();
        assert!((rd - va / (va + 1.0)).abs() < 1e-12);
        assert!((ry - 2.25 * va / (2.25 * va + 1.25)).abs() < 1e-12);
        assert!(population_r2(&SynthSpec::plr(SynthKind::PlrNonlinear, 0.5, 10, 0)).is_none());
    }
}
