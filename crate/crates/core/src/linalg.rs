//! Small dense symmetric-matrix routines.
//!
//! Matrices are square and stored row-major in a `Vec<f64>`; the sizes here
//! are the number of model parameters (tens at most), so nothing is blocked.

use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LinalgError {
    /// Pivot at `column` was not positive relative to the matrix scale.
    #[error("matrix is not positive definite (pivot {pivot:e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },
}

/// Relative pivot tolerance used to flag singular information matrices.
pub const PIVOT_TOLERANCE: f64 = 1e-10;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
///
/// A pivot is rejected when it is not above `PIVOT_TOLERANCE` times the
/// original diagonal entry of that column (or when that entry is zero), which
/// catches structurally zero and exactly collinear columns.
pub fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        let scale = a[j * n + j].abs();
        if !(d > PIVOT_TOLERANCE * scale) || !d.is_finite() || scale == 0.0 {
            return Err(LinalgError::NotPositiveDefinite {
                column: j,
                pivot: d,
            });
        }
        let djj = libm::sqrt(d);
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}

/// Factor for sampling from `N(0, A)` when `A` may be singular.
///
/// Columns whose pivot is numerically zero get a zero column in the factor,
/// so an all-zero covariance yields an all-zero factor. A clearly negative
/// pivot (indefinite input) is still an error.
pub fn psd_factor(a: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    let max_diag = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    let tol = 1e-12 * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !d.is_finite() || d < -1e-8 * max_diag.max(f64::MIN_POSITIVE) {
            return Err(LinalgError::NotPositiveDefinite {
                column: j,
                pivot: d,
            });
        }
        if d <= tol {
            continue;
        }
        let djj = libm::sqrt(d);
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}

/// Solve `L Lᵀ x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Inverse of `L Lᵀ`, symmetrized.
pub fn cholesky_inverse(l: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(l, n, &e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (inv[i * n + j] + inv[j * n + i]);
            inv[i * n + j] = avg;
            inv[j * n + i] = avg;
        }
    }
    inv
}

/// `y = L z` for a lower-triangular `L`.
pub fn lower_mul(l: &[f64], n: usize, z: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..=i).map(|k| l[i * n + k] * z[k]).sum())
        .collect()
}

pub fn add_diagonal(a: &mut [f64], n: usize, value: f64) {
    for i in 0..n {
        a[i * n + i] += value;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPD: [f64; 9] = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];

    #[test]
    fn factor_reconstructs() {
        let l = cholesky(&SPD, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i * 3 + k] * l[j * 3 + k]).sum();
                assert!((v - SPD[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let l = cholesky(&SPD, 3).unwrap();
        let inv = cholesky_inverse(&l, 3);
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| SPD[i * 3 + k] * inv[k * 3 + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flags_zero_and_duplicate_columns() {
        let zero_col = [2.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            cholesky(&zero_col, 2),
            Err(LinalgError::NotPositiveDefinite { column: 1, .. })
        ));
        // u = (a, a): rank one
        let dup = [3.0, 3.0, 3.0, 3.0];
        assert!(matches!(
            cholesky(&dup, 2),
            Err(LinalgError::NotPositiveDefinite { column: 1, .. })
        ));
    }

    #[test]
    fn psd_factor_handles_zero_matrix() {
        let l = psd_factor(&[0.0; 4], 2).unwrap();
        assert!(l.iter().all(|&x| x == 0.0));
        assert!(psd_factor(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
    }
}
