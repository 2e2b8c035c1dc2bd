//! Small dense linear-algebra helpers shared by the model and the solvers.
//!
//! Every Gram-matrix inversion in this crate goes through the Hermitian
//! Cholesky routines below; a jitter of `1e-12 * I` is added only when the
//! factorization fails outright.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

const JITTER: f64 = 1e-12;

fn cholesky_with_jitter(a: &CMat) -> Result<Cholesky<C64, Dyn>> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        return Ok(chol);
    }
    let mut jittered = a.clone();
    for i in 0..jittered.nrows() {
        jittered[(i, i)] += C64::new(JITTER, 0.0);
    }
    Cholesky::new(jittered).ok_or_else(|| {
        Error::Linalg(format!(
            "Cholesky factorization failed for {}x{} Hermitian matrix (even with jitter)",
            a.nrows(),
            a.ncols()
        ))
    })
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn hermitian_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != b.nrows() {
        return Err(Error::dim(
            "hermitian_solve",
            format!("rhs with {} rows", a.nrows()),
            format!("{} rows", b.nrows()),
        ));
    }
    Ok(cholesky_with_jitter(a)?.solve(b))
}

/// Inverse of a Hermitian positive-definite matrix.
pub fn hermitian_inverse(a: &CMat) -> Result<CMat> {
    Ok(cholesky_with_jitter(a)?.inverse())
}

/// `Tr(A^{-1})` for Hermitian positive-definite `A`, as a real number.
pub fn trace_inverse_hermitian(a: &CMat) -> Result<f64> {
    let inv = hermitian_inverse(a)?;
    Ok(inv.diagonal().iter().map(|z| z.re).sum())
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// `(A + A^T) / 2` for real matrices.
pub fn symmetric_part(a: &RMat) -> RMat {
    (a + a.transpose()).scale(0.5)
}

/// Scales row `i` of `m` by `w[i]`.
pub fn scale_rows(m: &CMat, w: &CVec) -> CMat {
    assert_eq!(m.nrows(), w.len());
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| w[i] * m[(i, j)])
}

/// Scales column `j` of `m` by `w[j]`.
pub fn scale_cols(m: &CMat, w: &CVec) -> CMat {
    assert_eq!(m.ncols(), w.len());
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * w[j])
}

/// Real-valued diagonal matrix embedded in the complex field.
pub fn complex_diag(d: &RVec) -> CMat {
    CMat::from_fn(d.len(), d.len(), |i, j| {
        if i == j {
            C64::new(d[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn real_to_complex(v: &RVec) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest eigenvalue of a real symmetric PSD matrix by power iteration.
///
/// Deterministic start vector; relative tolerance on successive Rayleigh
/// quotients. Returns 0 for the zero matrix.
pub fn largest_eigenvalue_psd(q: &RMat, rel_tol: f64, max_iter: usize) -> f64 {
    let n = q.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = RVec::from_fn(n, |i, _| 1.0 / (i + 1) as f64);
    v /= v.norm();
    let mut lambda = 0.0f64;
    for _ in 0..max_iter {
        let w = q * &v;
        let norm = w.norm();
        if norm < 1e-300 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= rel_tol * next.abs().max(1e-300) {
            return next;
        }
        lambda = next;
    }
    lambda
}
