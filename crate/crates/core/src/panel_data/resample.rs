use super::{Month, PanelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleMode {
    /// Each quarterly value fills its own three months.
    Repeat,
    /// Values sit at the quarter's first month; months in between are
    /// linearly interpolated.
    Interpolate,
}

/// Converts a quarterly series to monthly frequency.
///
/// Repeat output runs from the first quarter month through the last
/// quarter month + 2; Interpolate output ends at the last quarter month.
pub fn quarterly_to_monthly(
    series: &[(Month, f64)],
    mode: ResampleMode,
) -> Result<Vec<(Month, f64)>, PanelError> {
    let required = match mode {
        ResampleMode::Repeat => 1,
        ResampleMode::Interpolate => 2,
    };
    if series.len() < required {
        return Err(PanelError::TooFewPoints { required, actual: series.len() });
    }
    for pair in series.windows(2) {
        if pair[1].0.months_since(pair[0].0) != 3 {
            return Err(PanelError::IrregularSpacing { expected: 3, at: pair[1].0.to_string() });
        }
    }

    let mut out = Vec::with_capacity(series.len() * 3);
    match mode {
        ResampleMode::Repeat => {
            for &(m, v) in series {
                out.extend((0..3).map(|j| (m.offset(j), v)));
            }
        }
        ResampleMode::Interpolate => {
            for pair in series.windows(2) {
                let ((m0, v0), (_, v1)) = (pair[0], pair[1]);
                for j in 0..3 {
                    let w = j as f64 / 3.0;
                    out.push((m0.offset(j), v0 + w * (v1 - v0)));
                }
            }
            out.push(*series.last().unwrap());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> Month {
        s.parse().unwrap()
    }

    fn values(v: &[(Month, f64)]) -> Vec<f64> {
        v.iter().map(|p| p.1).collect()
    }

    #[test]
    fn repeat_fills_quarter() {
        let out = quarterly_to_monthly(&[(m("1990-01"), 4.0), (m("1990-04"), 7.0)], ResampleMode::Repeat).unwrap();
        assert_eq!(values(&out)[..4], [4.0, 4.0, 4.0, 7.0]);
        assert_eq!(out.len(), 6);
        assert_eq!(out.last().unwrap().0, m("1990-06"));
    }

    #[test]
    fn interpolate_is_linear() {
        let out =
            quarterly_to_monthly(&[(m("1990-01"), 4.0), (m("1990-04"), 7.0)], ResampleMode::Interpolate).unwrap();
        assert_eq!(values(&out), [4.0, 5.0, 6.0, 7.0]);
        assert_eq!(out.last().unwrap().0, m("1990-04"));
    }

    #[test]
    fn constant_stays_constant() {
        let q: Vec<_> = (0..5).map(|i| (m("2000-01").offset(3 * i), 2.5)).collect();
        for mode in [ResampleMode::Repeat, ResampleMode::Interpolate] {
            assert!(quarterly_to_monthly(&q, mode).unwrap().iter().all(|p| p.1 == 2.5));
        }
    }

    #[test]
    fn errors() {
        let irregular = [(m("1990-01"), 1.0), (m("1990-03"), 2.0)];
        assert!(matches!(
            quarterly_to_monthly(&irregular, ResampleMode::Repeat),
            Err(PanelError::IrregularSpacing { .. })
        ));
        assert!(matches!(
            quarterly_to_monthly(&[(m("1990-01"), 1.0)], ResampleMode::Interpolate),
            Err(PanelError::TooFewPoints { required: 2, actual: 1 })
        ));
    }

    proptest::proptest! {
        #[test]
        fn repeat_downsamples_back(vals in proptest::collection::vec(-1e6f64..1e6, 1..30)) {
            let q: Vec<_> = vals.iter().enumerate().map(|(i, &v)| (m("1985-10").offset(3 * i as i32), v)).collect();
            let monthly = quarterly_to_monthly(&q, ResampleMode::Repeat).unwrap();
            let back: Vec<_> = monthly.iter().step_by(3).copied().collect();
            proptest::prop_assert_eq!(back, q);
        }
    }
}
