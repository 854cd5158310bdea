//! Dense matrix-equation solvers and the matrix exponential.

mod schur;
mod sylvester;

pub use schur::{real_mul, real_tr_mul, to_complex, to_complex_mat, Block, RealSchur};
pub use sylvester::{solve_lyapunov, solve_lyapunov_schur, solve_sylvester, solve_sylvester_schur};

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{MorError, Result};

/// Dense real matrix used for every realization and derived quantity.
pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CVec = DVector<Complex<f64>>;

/// `e^{A t}` by scaling and squaring with a Padé approximant.
pub fn matrix_exponential(a: &Mat, t: f64) -> Result<Mat> {
    if a.nrows() != a.ncols() {
        return Err(MorError::DimensionMismatch(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !t.is_finite() || a.iter().any(|v| !v.is_finite()) {
        return Err(MorError::NonFinite("matrix exponential input"));
    }
    if a.nrows() == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let e = (a * t).exp();
    if e.iter().any(|v| !v.is_finite()) {
        return Err(MorError::NonFinite("matrix exponential"));
    }
    Ok(e)
}

/// Spectral norm estimate by power iteration on `AᵀA`.
pub fn norm2_estimate(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let mut v = Vector::from_element(a.ncols(), 1.0 / (a.ncols() as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..60 {
        let w = a.tr_mul(&(a * &v));
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw.sqrt();
        v = w / nw;
        if (next - est).abs() <= 1e-10 * next {
            est = next;
            break;
        }
        est = next;
    }
    // Power iteration underestimates; the Frobenius norm is a hard upper bound.
    est.min(a.norm())
}

/// Symmetric part `(P + Pᵀ)/2`, exactly symmetric.
pub fn symmetrize(p: &Mat) -> Mat {
    let n = p.nrows();
    let mut s = Mat::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let v = 0.5 * (p[(i, j)] + p[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}
