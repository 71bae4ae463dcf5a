use ndarray::{Array1, Array2, ArrayView2};

use super::PreprocessError;
use crate::panel_data::TimeSeriesMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrMatrix {
    pub names: Vec<String>,
    pub values: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrPcaReport {
    pub corr: Array2<f64>,
    /// Descending.
    pub eigenvalues: Array1<f64>,
    /// Column `i` is the loading vector of component `i`.
    pub components: Array2<f64>,
    pub explained_ratio: Array1<f64>,
}

/// Pearson correlations over pairwise-complete observations.
pub fn correlation_matrix(vars: &TimeSeriesMatrix) -> Result<CorrMatrix, PreprocessError> {
    let k = vars.n_cols();
    let names = vars.columns().to_vec();
    for (i, name) in names.iter().enumerate() {
        let vals: Vec<f64> = vars.column_at(i).iter().flatten().copied().collect();
        if vals.len() >= 2 && vals.iter().all(|&v| v == vals[0]) {
            return Err(PreprocessError::ConstantColumn(name.clone()));
        }
    }
    let mut values = Array2::<f64>::eye(k);
    for i in 0..k {
        for j in i + 1..k {
            let pairs: Vec<(f64, f64)> = vars
                .column_at(i)
                .iter()
                .zip(vars.column_at(j))
                .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                .collect();
            if pairs.len() < 2 {
                return Err(PreprocessError::InsufficientPairs(names[i].clone(), names[j].clone()));
            }
            let r = pearson(&pairs).ok_or_else(|| {
                let which = if pairs.iter().all(|p| p.0 == pairs[0].0) { i } else { j };
                PreprocessError::ConstantColumn(names[which].clone())
            })?;
            values[[i, j]] = r;
            values[[j, i]] = r;
        }
    }
    Ok(CorrMatrix { names, values })
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    let (mx, my) = pairs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

const SYM_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a correlation matrix by cyclic Jacobi rotations.
pub fn pca_corr(corr: ArrayView2<f64>) -> Result<CorrPcaReport, PreprocessError> {
    let (n, m) = corr.dim();
    if n != m {
        return Err(PreprocessError::NotSymmetric);
    }
    for i in 0..n {
        if (corr[[i, i]] - 1.0).abs() > SYM_TOL {
            return Err(PreprocessError::NotUnitDiagonal);
        }
        for j in 0..i {
            if (corr[[i, j]] - corr[[j, i]]).abs() > SYM_TOL {
                return Err(PreprocessError::NotSymmetric);
            }
        }
    }
    let (vals, vecs) = jacobi_eigen(corr);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let eigenvalues: Array1<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut components = Array2::<f64>::zeros((n, n));
    for (c, &i) in order.iter().enumerate() {
        let mut v = vecs.column(i).to_owned();
        let mut big = 0;
        for r in 1..n {
            if v[r].abs() > v[big].abs() + 1e-12 {
                big = r;
            }
        }
        if v[big] < 0.0 {
            v.mapv_inplace(|x| -x);
        }
        components.column_mut(c).assign(&v);
    }
    let trace: f64 = eigenvalues.sum();
    let explained_ratio = eigenvalues.mapv(|l| l / trace);
    Ok(CorrPcaReport { corr: corr.to_owned(), eigenvalues, components, explained_ratio })
}

fn jacobi_eigen(a: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut a = a.to_owned();
    // symmetrise exactly
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[[i, i]]).collect(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn tsm(cols: Vec<Vec<Option<f64>>>) -> TimeSeriesMatrix {
        let names = (0..cols.len()).map(|i| format!("c{i}")).collect();
        TimeSeriesMatrix::from_start("2010-01".parse().unwrap(), names, cols).unwrap()
    }

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn hand_computed_pearson() {
        let c = correlation_matrix(&tsm(vec![some(&[1.0, 2.0, 3.0]), some(&[1.0, 2.0, 4.0])])).unwrap();
        // sxy = 3, sxx = 2, syy = 14/3
        assert!((c.values[[0, 1]] - 3.0 / (2.0f64 * 14.0 / 3.0).sqrt()).abs() < 1e-12);
        assert!((c.values[[0, 1]] - 0.98198).abs() < 1e-5);
        assert_eq!(c.values[[0, 0]], 1.0);
    }

    #[test]
    fn self_and_negation() {
        let x = [0.3, -1.2, 2.2, 0.7, 5.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = correlation_matrix(&tsm(vec![some(&x), some(&x), some(&neg)])).unwrap();
        assert!((c.values[[0, 1]] - 1.0).abs() < 1e-15);
        assert!((c.values[[0, 2]] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pairwise_complete_and_errors() {
        let a = vec![Some(1.0), None, Some(3.0), Some(4.0)];
        let b = vec![Some(2.0), Some(9.0), Some(6.0), Some(8.0)];
        let c = correlation_matrix(&tsm(vec![a, b])).unwrap();
        assert!((c.values[[0, 1]] - 1.0).abs() < 1e-12);
        let err = correlation_matrix(&tsm(vec![some(&[1.0, 2.0, 3.0]), some(&[2.0; 3])])).unwrap_err();
        assert_eq!(err, PreprocessError::ConstantColumn("c1".into()));
        let err = correlation_matrix(&tsm(vec![vec![Some(1.0), Some(2.0), None], vec![None, Some(1.0), Some(3.0)]]))
            .unwrap_err();
        assert!(matches!(err, PreprocessError::InsufficientPairs(..)));
    }

    #[test]
    fn identity_and_two_by_two() {
        let r = pca_corr(Array2::<f64>::eye(3).view()).unwrap();
        assert_eq!(r.eigenvalues.to_vec(), [1.0, 1.0, 1.0]);
        let m = ndarray::array![[1.0, 0.6], [0.6, 1.0]];
        let r = pca_corr(m.view()).unwrap();
        assert!((r.eigenvalues[0] - 1.6).abs() < 1e-12);
        assert!((r.eigenvalues[1] - 0.4).abs() < 1e-12);
        assert!(r.components[[0, 0]] > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let m = ndarray::array![[1.0, 0.5], [0.4, 1.0]];
        assert_eq!(pca_corr(m.view()).unwrap_err(), PreprocessError::NotSymmetric);
        let m = ndarray::array![[2.0, 0.5], [0.5, 1.0]];
        assert_eq!(pca_corr(m.view()).unwrap_err(), PreprocessError::NotUnitDiagonal);
        assert_eq!(pca_corr(Array2::<f64>::zeros((2, 3)).view()).unwrap_err(), PreprocessError::NotSymmetric);
    }

    fn random_corr(k: usize, seed: u64) -> Array2<f64> {
        let mut rng = stream(seed);
        let cols = (0..k)
            .map(|_| (0..40).map(|_| Some(StandardNormal.sample(&mut rng))).collect())
            .collect();
        correlation_matrix(&tsm(cols)).unwrap().values
    }

    #[test]
    fn matches_nalgebra_eigenvalues() {
        let c = random_corr(6, 11);
        let r = pca_corr(c.view()).unwrap();
        let na = nalgebra::DMatrix::from_fn(6, 6, |i, j| c[[i, j]]);
        let mut ev: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in r.eigenvalues.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn reconstruction_and_orthonormality(seed in 0u64..100_000, k in 2usize..8) {
            let c = random_corr(k, seed);
            let r = pca_corr(c.view()).unwrap();
            let lam = Array2::from_diag(&r.eigenvalues);
            let back = r.components.dot(&lam).dot(&r.components.t());
            for (a, b) in back.iter().zip(c.iter()) {
                prop_assert!((a - b).abs() < 1e-8);
            }
            let gram = r.components.t().dot(&r.components);
            for i in 0..k {
                for j in 0..k {
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((gram[[i, j]] - want).abs() < 1e-8);
                }
            }
            prop_assert!((r.eigenvalues.sum() - k as f64).abs() < 1e-9);
            prop_assert!((r.explained_ratio.sum() - 1.0).abs() < 1e-9);
            for w in r.eigenvalues.to_vec().windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }
    }
}
