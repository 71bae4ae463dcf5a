//! Dense least squares by Householder QR, plus a Cholesky log-determinant.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("design matrix is rank deficient (column {column} is collinear with earlier columns)")]
    RankDeficient { column: usize },
    #[error("least squares needs at least as many rows ({rows}) as columns ({cols})")]
    Underdetermined { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Relative size below which a diagonal entry of R counts as zero.
const RANK_TOL: f64 = 1e-10;

/// Solution of `min ‖A b − y‖²` together with the triangular factor.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Array1<f64>,
    pub residuals: Array1<f64>,
    r: Array2<f64>,
}

impl LeastSquares {
    pub fn rss(&self) -> f64 {
        self.residuals.dot(&self.residuals)
    }

    /// Diagonal of `(AᵀA)⁻¹`, from the row norms of `R⁻¹`.
    pub fn xtx_inv_diag(&self) -> Array1<f64> {
        let p = self.r.nrows();
        let mut rinv = Array2::<f64>::zeros((p, p));
        for col in 0..p {
            // solve R x = e_col
            for i in (0..=col).rev() {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for k in i + 1..=col {
                    s -= self.r[[i, k]] * rinv[[k, col]];
                }
                rinv[[i, col]] = s / self.r[[i, i]];
            }
        }
        rinv.rows().into_iter().map(|row| row.dot(&row)).collect()
    }
}

/// Least squares via Householder reflections applied in place.
pub fn least_squares(a: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<LeastSquares, LinalgError> {
    let (n, p) = a.dim();
    if y.len() != n {
        return Err(LinalgError::DimensionMismatch(format!("{n} rows but {} targets", y.len())));
    }
    if n < p {
        return Err(LinalgError::Underdetermined { rows: n, cols: p });
    }
    let col_norms: Vec<f64> = a.columns().into_iter().map(|c| c.dot(&c).sqrt()).collect();
    let mut qr = a.to_owned();
    let mut qty = y.to_owned();
    let mut v = vec![0.0; n];

    for j in 0..p {
        let norm = (j..n).map(|i| qr[[i, j]] * qr[[i, j]]).sum::<f64>().sqrt();
        if norm <= RANK_TOL * col_norms[j] || col_norms[j] == 0.0 {
            return Err(LinalgError::RankDeficient { column: j });
        }
        let alpha = if qr[[j, j]] > 0.0 { -norm } else { norm };
        for i in j..n {
            v[i] = qr[[i, j]];
        }
        v[j] -= alpha;
        let vnorm2: f64 = (j..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 > 0.0 {
            for k in j..p {
                let s: f64 = (j..n).map(|i| v[i] * qr[[i, k]]).sum::<f64>() * 2.0 / vnorm2;
                for i in j..n {
                    qr[[i, k]] -= s * v[i];
                }
            }
            let s: f64 = (j..n).map(|i| v[i] * qty[i]).sum::<f64>() * 2.0 / vnorm2;
            for i in j..n {
                qty[i] -= s * v[i];
            }
        }
        qr[[j, j]] = alpha;
    }

    let mut r = Array2::<f64>::zeros((p, p));
    for i in 0..p {
        for k in i..p {
            r[[i, k]] = qr[[i, k]];
        }
    }
    let mut beta = Array1::<f64>::zeros(p);
    for i in (0..p).rev() {
        let mut s = qty[i];
        for k in i + 1..p {
            s -= r[[i, k]] * beta[k];
        }
        beta[i] = s / r[[i, i]];
    }
    let residuals = &y - &a.dot(&beta);
    Ok(LeastSquares { coefficients: beta, residuals, r })
}

/// `ln det` of a symmetric positive-definite matrix, `None` if not SPD.
pub fn log_det_spd(m: ArrayView2<f64>) -> Option<f64> {
    let k = m.nrows();
    let mut l = Array2::<f64>::zeros((k, k));
    let mut log_det = 0.0;
    for j in 0..k {
        let mut diag = m[[j, j]];
        for p in 0..j {
            diag -= l[[j, p]] * l[[j, p]];
        }
        if !(diag > 0.0) {
            return None;
        }
        let ljj = diag.sqrt();
        l[[j, j]] = ljj;
        log_det += 2.0 * ljj.ln();
        for i in j + 1..k {
            let mut s = m[[i, j]];
            for p in 0..j {
                s -= l[[i, p]] * l[[j, p]];
            }
            l[[i, j]] = s / ljj;
        }
    }
    Some(log_det)
}

/// `[1 | X]`: the design matrix with a leading intercept column.
pub fn with_intercept(x: ArrayView2<f64>) -> Array2<f64> {
    let (n, k) = x.dim();
    let mut out = Array2::<f64>::ones((n, k + 1));
    out.slice_mut(ndarray::s![.., 1..]).assign(&x);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn exact_fit() {
        let a = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]];
        let y = array![1.0, 3.0, 5.0];
        let ls = least_squares(a.view(), y.view()).unwrap();
        assert!((ls.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((ls.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(ls.rss() < 1e-20);
    }

    #[test]
    fn inverse_diagonal_matches_closed_form() {
        // AᵀA = [[3,3],[3,5]], inverse diag = [5/6, 3/6]
        let a = array![[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]];
        let ls = least_squares(a.view(), array![0.0, 1.0, 0.0].view()).unwrap();
        let d = ls.xtx_inv_diag();
        assert!((d[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((d[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_detected() {
        let a = array![[1.0, 2.0, 3.0], [1.0, 3.0, 4.0], [1.0, 5.0, 6.0], [1.0, 0.5, 1.5]];
        let err = least_squares(a.view(), array![1.0, 2.0, 3.0, 4.0].view()).unwrap_err();
        assert_eq!(err, LinalgError::RankDeficient { column: 2 });
        let zero = array![[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]];
        assert!(least_squares(zero.view(), array![1.0, 2.0, 3.0].view()).is_err());
    }

    #[test]
    fn log_det() {
        let m = array![[4.0, 2.0], [2.0, 3.0]];
        assert!((log_det_spd(m.view()).unwrap() - 8f64.ln()).abs() < 1e-12);
        assert!(log_det_spd(array![[1.0, 2.0], [2.0, 1.0]].view()).is_none());
    }
}
