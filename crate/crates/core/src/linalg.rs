//! Small dense helpers for matrices given as rows.

use crate::surrogate::dot;

/// Lower Cholesky factor, or `None` when a pivot is not positive.
pub(crate) fn cholesky_dense(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = a[i][j] - dot(&l[i][..j], &l[j][..j]);
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of a symmetric positive-definite matrix.
pub(crate) fn spd_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let l = cholesky_dense(a)?;
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        let mut z = vec![0.0; n];
        for i in 0..n {
            let rhs = if i == c { 1.0 } else { 0.0 };
            z[i] = (rhs - dot(&l[i][..i], &z[..i])) / l[i][i];
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|k| l[k][i] * z[k]).sum();
            z[i] = (z[i] - s) / l[i][i];
        }
        for r in 0..n {
            inv[r][c] = z[r];
        }
    }
    Some(inv)
}

/// `log det` of a symmetric positive-definite matrix.
pub(crate) fn spd_logdet(a: &[Vec<f64>]) -> Option<f64> {
    let l = cholesky_dense(a)?;
    Some(2.0 * l.iter().enumerate().map(|(i, r)| r[i].ln()).sum::<f64>())
}

pub(crate) fn quad_form(m: &[Vec<f64>], v: &[f64]) -> f64 {
    m.iter().zip(v).map(|(row, vi)| vi * dot(row, v)).sum()
}
