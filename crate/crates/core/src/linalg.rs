//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max|m - m^H| / max|m|`, zero for the zero matrix.
pub fn hermitian_asymmetry(m: &CMatrix) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// `(m + m^H) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Ratio of the smallest eigenvalue to the largest-magnitude one.
pub fn min_eigen_ratio(m: &CMatrix) -> f64 {
    let ev = hermitian_eigenvalues(m);
    let top = ev.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    if top == 0.0 {
        0.0
    } else {
        ev[0] / top
    }
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm2(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0_f64, |a, e| a.max(e.abs()))
}

/// Rejects matrices that are not Hermitian or not positive semidefinite at the
/// given relative tolerance.
pub fn check_hermitian_psd(m: &CMatrix, tol: f64) -> Result<()> {
    let asym = hermitian_asymmetry(m);
    if asym > tol {
        return Err(Error::NotHermitian(asym));
    }
    let ratio = min_eigen_ratio(m);
    if ratio < -tol {
        return Err(Error::NotPositiveSemidefinite { ratio, tol });
    }
    Ok(())
}

pub fn diag(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(values))
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    CMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            ZERO
        }
    })
}

/// Elementwise real part, kept complex.
pub fn real_part(m: &CMatrix) -> CMatrix {
    m.map(|z| Complex64::new(z.re, 0.0))
}

/// Inverse through LU, with a reciprocal-condition estimate from the LU
/// pivots. Errors when the matrix is numerically singular.
pub fn inverse(m: &CMatrix, what: &str) -> Result<CMatrix> {
    let n = m.nrows();
    let lu = m.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::IllConditionedNetwork(format!("{what} is singular")))?;
    let rcond = 1.0 / (one_norm(m) * one_norm(&inv));
    if !rcond.is_finite() || rcond < (n as f64) * f64::EPSILON {
        return Err(Error::IllConditionedNetwork(format!(
            "{what} is singular to working precision (rcond {rcond:e})"
        )));
    }
    Ok(inv)
}

/// Maximum absolute column sum.
pub fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_norm(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `x^T y` without conjugation.
pub fn dot_t(x: &CVector, y: &CVector) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// `a^T M a*`, real part (exactly real for Hermitian M).
pub fn quad_form(a: &CVector, m: &CMatrix) -> f64 {
    let conj = a.map(|z| z.conj());
    dot_t(a, &(m * conj)).re
}
