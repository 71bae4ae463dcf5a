use rand_distr::{Distribution, Normal};

use super::{SynthError, SynthKind, SynthSpec};
use crate::rng::stream;

/// `WhiteNoise`: `y_t = ε_t`; `RandomWalk`: `y_t = y_{t−1} + ε_t`;
/// `Ar1`: `y_t = φ y_{t−1} + ε_t`. Recursions start from `y_0 = 0`, which is
/// not part of the output. The same seed yields the same `ε` for all kinds.
pub fn gen_unit_root(spec: &SynthSpec) -> Result<Vec<f64>, SynthError> {
    spec.check_common()?;
    let phi = match spec.kind {
        SynthKind::WhiteNoise => 0.0,
        SynthKind::RandomWalk => 1.0,
        SynthKind::Ar1 => {
            if !(spec.phi.abs() < 1.0) {
                return Err(SynthError::BadPhi(spec.phi));
            }
            spec.phi
        }
        other => return Err(SynthError::BadKind(other)),
    };
    let noise = Normal::new(0.0, spec.noise_sd).expect("positive sd");
    let mut rng = stream(spec.seed);
    let mut y = 0.0;
    Ok((0..spec.n)
        .map(|_| {
            let e = noise.sample(&mut rng);
            y = if phi == 0.0 { e } else { phi * y + e };
            y
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{adf_test, first_difference, LagChoice, SignificanceLevel};

    #[test]
    fn random_walk_differences_are_the_innovations() {
        let eps = gen_unit_root(&SynthSpec::new(SynthKind::WhiteNoise, 300, 5)).unwrap();
        let rw = gen_unit_root(&SynthSpec::new(SynthKind::RandomWalk, 300, 5)).unwrap();
        assert_eq!(rw[0], eps[0]);
        let d = first_difference(&rw).unwrap();
        for (a, b) in d.iter().zip(&eps[1..]) {
            assert!((a - b).abs() < 1e-12 * (1.0 + rw.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
        }
    }

    #[test]
    fn white_noise_round_trip() {
        let wn = gen_unit_root(&SynthSpec::new(SynthKind::WhiteNoise, 100, 6)).unwrap();
        let cum: Vec<f64> = wn.iter().scan(0.0, |s, e| { *s += e; Some(*s) }).collect();
        let back = first_difference(&cum).unwrap();
        for (a, b) in back.iter().zip(&wn[1..]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_phi_and_kind() {
        assert_eq!(gen_unit_root(&SynthSpec::ar1(1.0, 10, 0)).unwrap_err(), SynthError::BadPhi(1.0));
        assert_eq!(gen_unit_root(&SynthSpec::ar1(-1.2, 10, 0)).unwrap_err(), SynthError::BadPhi(-1.2));
        assert!(matches!(gen_unit_root(&SynthSpec::new(SynthKind::PlrLinear, 10, 0)), Err(SynthError::BadKind(_))));
    }

    #[test]
    fn persistence_raises_adf_statistic() {
        let mut higher = 0;
        for seed in 0..100 {
            let stat = |phi| {
                let y = gen_unit_root(&SynthSpec::ar1(phi, 200, seed)).unwrap();
                adf_test(&y, SignificanceLevel::FivePct, LagChoice::Auto).unwrap().statistic
            };
            if stat(0.99) > stat(0.2) {
                higher += 1;
            }
        }
        assert!(higher >= 95, "higher = {higher}");
    }
}
