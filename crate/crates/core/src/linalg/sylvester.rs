//! Bartels–Stewart solvers for Sylvester and Lyapunov equations.

use super::{symmetrize, Mat, RealSchur};
use crate::error::{MorError, Result};

/// Solves `A Y + Y M + K = 0`.
///
/// The observability-side equation `Aᵀ Y + Y M + K = 0` is obtained by passing
/// `Aᵀ` as the first argument.
pub fn solve_sylvester(a: &Mat, m: &Mat, k: &Mat) -> Result<Mat> {
    check_square(a, "Sylvester left coefficient")?;
    check_square(m, "Sylvester right coefficient")?;
    let sa = RealSchur::new(a)?;
    let sm = RealSchur::new(m)?;
    solve_sylvester_schur(&sa, &sm, k)
}

/// Solves `A P + P Aᵀ + G = 0` for stable `A`; the result is exactly symmetric.
pub fn solve_lyapunov(a: &Mat, g: &Mat) -> Result<Mat> {
    check_square(a, "Lyapunov coefficient")?;
    let sa = RealSchur::new(a)?;
    solve_lyapunov_schur(&sa, g)
}

/// [`solve_lyapunov`] with a precomputed Schur form of `A`.
pub fn solve_lyapunov_schur(sa: &RealSchur, g: &Mat) -> Result<Mat> {
    sa.check_stable()?;
    let p = solve_sylvester_schur(sa, &sa.transpose(), g)?;
    Ok(symmetrize(&p))
}

/// Solves `A Y + Y M + K = 0` given Schur forms of `A` (n×n) and `M` (r×r).
pub fn solve_sylvester_schur(sa: &RealSchur, sm: &RealSchur, k: &Mat) -> Result<Mat> {
    let (n, r) = (sa.order(), sm.order());
    if k.nrows() != n || k.ncols() != r {
        return Err(MorError::DimensionMismatch(format!(
            "Sylvester constant term is {}x{}, expected {}x{}",
            k.nrows(),
            k.ncols(),
            n,
            r
        )));
    }
    if n == 0 || r == 0 {
        return Ok(Mat::zeros(n, r));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(MorError::NonFinite("Sylvester constant term"));
    }
    let (ta, tm) = (sa.t(), sm.t());
    let f = -(sa.q().tr_mul(k) * sm.q());
    let scale = ta.amax().max(tm.amax()).max(f64::MIN_POSITIVE);
    let mut x = Mat::zeros(n, r);

    for &(j0, q) in sm.blocks() {
        let mut rhs = f.columns(j0, q).into_owned();
        if j0 > 0 {
            rhs.gemm(
                -1.0,
                &x.columns(0, j0),
                &tm.view((0, j0), (j0, q)),
                1.0,
            );
        }
        for &(i0, p) in sa.blocks().iter().rev() {
            let xij = solve_block(ta, i0, p, tm, j0, q, &rhs, scale)?;
            x.view_mut((i0, j0), (p, q)).copy_from(&xij);
            if i0 > 0 {
                rhs.rows_mut(0, i0)
                    .gemm(-1.0, &ta.view((0, i0), (i0, p)), &xij, 1.0);
            }
        }
    }

    let y = sa.q() * x * sm.q().transpose();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(MorError::NonFinite("Sylvester solve"));
    }
    Ok(y)
}

/// Solves the `p×q` block equation `T_II X + X M_JJ = R_I` (p, q ≤ 2).
#[allow(clippy::too_many_arguments)]
fn solve_block(
    ta: &Mat,
    i0: usize,
    p: usize,
    tm: &Mat,
    j0: usize,
    q: usize,
    rhs: &Mat,
    scale: f64,
) -> Result<Mat> {
    let size = p * q;
    let mut sys = [[0.0f64; 4]; 4];
    let mut b = [0.0f64; 4];
    // Column-major vec: unknown (a, c) sits at a + p·c.
    for c in 0..q {
        for a in 0..p {
            let row = a + p * c;
            b[row] = rhs[(i0 + a, c)];
            for d in 0..q {
                for bb in 0..p {
                    let col = bb + p * d;
                    let mut v = 0.0;
                    if c == d {
                        v += ta[(i0 + a, i0 + bb)];
                    }
                    if a == bb {
                        v += tm[(j0 + d, j0 + c)];
                    }
                    sys[row][col] = v;
                }
            }
        }
    }
    let sol = solve_small(&mut sys, &mut b, size, 1e-14 * scale).ok_or(MorError::SpectraOverlap)?;
    Ok(Mat::from_fn(p, q, |a, c| sol[a + p * c]))
}

/// Gaussian elimination with complete pivoting on a system of size ≤ 4.
#[allow(clippy::needless_range_loop)]
fn solve_small(sys: &mut [[f64; 4]; 4], b: &mut [f64; 4], n: usize, tiny: f64) -> Option<[f64; 4]> {
    let mut perm = [0usize, 1, 2, 3];
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                if sys[i][j].abs() > best {
                    best = sys[i][j].abs();
                    pr = i;
                    pc = j;
                }
            }
        }
        if best <= tiny {
            return None;
        }
        sys.swap(k, pr);
        b.swap(k, pr);
        if pc != k {
            for row in sys.iter_mut().take(n) {
                row.swap(k, pc);
            }
            perm.swap(k, pc);
        }
        for i in k + 1..n {
            let factor = sys[i][k] / sys[k][k];
            if factor != 0.0 {
                for j in k..n {
                    sys[i][j] -= factor * sys[k][j];
                }
                b[i] -= factor * b[k];
            }
        }
    }
    let mut y = [0.0f64; 4];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= sys[k][j] * y[j];
        }
        y[k] = acc / sys[k][k];
    }
    let mut x = [0.0f64; 4];
    for k in 0..n {
        x[perm[k]] = y[k];
    }
    Some(x)
}

fn check_square(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(MorError::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn scalar_lyapunov() {
        let p = solve_lyapunov(&dmatrix![-1.0], &dmatrix![4.0]).unwrap();
        assert!((p[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn identity_lyapunov() {
        let a = -Mat::identity(2, 2);
        let p = solve_lyapunov(&a, &Mat::identity(2, 2)).unwrap();
        assert!((p - Mat::identity(2, 2) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn diagonal_lyapunov_against_closed_form() {
        let a = dmatrix![-1.0, 0.0; 0.0, -2.0];
        let g = dmatrix![1.0, 1.0; 1.0, 1.0];
        let p = solve_lyapunov(&a, &g).unwrap();
        let expected = dmatrix![0.5, 1.0 / 3.0; 1.0 / 3.0, 0.25];
        assert!((p - expected).norm() < 1e-14);
    }

    #[test]
    fn scalar_sylvester() {
        let y = solve_sylvester(&dmatrix![-1.0], &dmatrix![-2.0], &dmatrix![6.0]).unwrap();
        assert!((y[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_sylvester() {
        let a = dmatrix![-1.0, 2.0; -3.0, -1.0];
        let m = dmatrix![-0.5];
        let y = solve_sylvester(&a, &m, &Mat::zeros(2, 1)).unwrap();
        assert_eq!(y, Mat::zeros(2, 1));
    }

    #[test]
    fn unstable_lyapunov_rejected() {
        let err = solve_lyapunov(&dmatrix![0.5], &dmatrix![1.0]).unwrap_err();
        assert!(matches!(err, MorError::NotStable { .. }));
    }

    #[test]
    fn overlapping_spectra_rejected() {
        let err = solve_sylvester(&dmatrix![1.0], &dmatrix![-1.0], &dmatrix![1.0]).unwrap_err();
        assert!(matches!(err, MorError::SpectraOverlap));
    }

    #[test]
    fn dimension_mismatch() {
        let err = solve_sylvester(&dmatrix![-1.0], &dmatrix![-1.0], &Mat::zeros(2, 1)).unwrap_err();
        assert!(matches!(err, MorError::DimensionMismatch(_)));
    }

    #[test]
    fn lyapunov_output_is_bitwise_symmetric() {
        let a = dmatrix![-1.0, 3.0, 0.2; -2.0, -1.5, 0.0; 0.1, 0.4, -0.7];
        let g = dmatrix![1.0, 0.2, 0.0; 0.2, 2.0, 0.3; 0.0, 0.3, 0.5];
        let p = solve_lyapunov(&a, &g).unwrap();
        assert_eq!(p, p.transpose());
    }
}
