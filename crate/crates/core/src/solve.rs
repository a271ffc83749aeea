//! Minimum-norm least squares via a truncated-SVD pseudoinverse.
//!
//! The truncation threshold is always expressed relative to the largest
//! singular value so that "rank" here and in the certification path agree on
//! the effective subspace.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Moore-Penrose pseudoinverse with singular values below tol * sigma_max
/// treated as zero.
pub fn pinv(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    svd.pseudo_inverse(tol * smax)
        .expect("SVD requested with both factors")
}

/// x = A^+ b: among all least-squares minimizers of |Ax - b|, the one of
/// minimal Euclidean norm.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} entries but the matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    Ok(pinv(a, tol) * b)
}
