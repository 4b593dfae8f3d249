//! Small dense linear algebra: SPD Cholesky and triangular solves.
//!
//! Sized for Gram matrices of sensing matrices (n up to a few hundred), where
//! a naive blocked-free factorization is plenty and avoids an external BLAS.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Lower Cholesky factor of a symmetric positive-definite matrix.
///
/// Fails with [`Error::IllConditioned`] when a pivot falls below
/// `n * eps * max_diag`, i.e. the matrix is numerically rank-deficient.
pub fn cholesky_lower(a: &ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dim(format!(
            "cholesky needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let max_diag = (0..n).map(|i| a[[i, i]]).fold(0.0_f64, f64::max);
    let pivot_floor = (n as f64) * f64::EPSILON * max_diag.max(f64::MIN_POSITIVE);

    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > pivot_floor) {
            return Err(Error::IllConditioned(format!(
                "cholesky pivot {d:.3e} at column {j} (floor {pivot_floor:.3e})"
            )));
        }
        let dj = d.sqrt();
        l[[j, j]] = dj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / dj;
        }
    }
    Ok(l)
}

/// Solves L L^T x = b in place given the lower factor.
pub fn cholesky_solve_in_place(l: &ArrayView2<f64>, b: &mut Array1<f64>) {
    let n = l.nrows();
    debug_assert_eq!(b.len(), n);
    // forward: L z = b
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * b[k];
        }
        b[i] = s / l[[i, i]];
    }
    // backward: L^T x = z
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * b[k];
        }
        b[i] = s / l[[i, i]];
    }
}

/// Crude condition estimate from the factor's diagonal spread: for L L^T this
/// is a lower bound on the true 2-norm condition number.
pub fn cond_estimate_from_factor(l: &ArrayView2<f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for i in 0..l.nrows() {
        let d = l[[i, i]];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo) * (hi / lo)
    }
}
