//! Real Schur form `A = Q T Qᵀ` with explicit diagonal block structure.
//!
//! `T` is upper quasi-triangular: 1×1 blocks carry real eigenvalues and 2×2
//! blocks carry complex-conjugate pairs. Everything that needs spectral
//! information about a state matrix (Bartels–Stewart, shifted solves for
//! IRKA, eigenvectors, stability checks) goes through this type so the
//! decomposition is computed once per matrix.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use super::{CVec, Mat};
use crate::error::{MorError, Result};

type C64 = Complex<f64>;

/// A diagonal block of the quasi-triangular factor: `(start, size)`.
pub type Block = (usize, usize);

#[derive(Debug, Clone)]
pub struct RealSchur {
    q: Mat,
    t: Mat,
    blocks: Vec<Block>,
}

impl RealSchur {
    pub fn new(a: &Mat) -> Result<Self> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(MorError::DimensionMismatch(format!(
                "Schur form needs a square matrix, got {}x{}",
                n,
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(MorError::NonFinite("Schur decomposition input"));
        }
        if n == 0 {
            return Ok(Self {
                q: Mat::zeros(0, 0),
                t: Mat::zeros(0, 0),
                blocks: Vec::new(),
            });
        }
        let max_iters = 200 * n.max(10);
        let schur = Schur::try_new(a.clone(), f64::EPSILON, max_iters).ok_or(MorError::SchurFailure)?;
        let (q, mut t) = schur.unpack();
        for j in 0..n {
            for i in (j + 2)..n {
                t[(i, j)] = 0.0;
            }
        }
        let mut blocks = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            if i + 1 < n && t[(i + 1, i)] != 0.0 {
                if i + 2 < n && t[(i + 2, i + 1)] != 0.0 {
                    return Err(MorError::SchurFailure);
                }
                blocks.push((i, 2));
                i += 2;
            } else {
                blocks.push((i, 1));
                i += 1;
            }
        }
        Ok(Self { q, t, blocks })
    }

    /// Schur form of a block-diagonal matrix `diag(A₁, A₂)` from those of its blocks.
    pub fn block_diag(first: &RealSchur, second: &RealSchur) -> RealSchur {
        let (n1, n2) = (first.order(), second.order());
        let n = n1 + n2;
        let mut q = Mat::zeros(n, n);
        let mut t = Mat::zeros(n, n);
        q.view_mut((0, 0), (n1, n1)).copy_from(&first.q);
        q.view_mut((n1, n1), (n2, n2)).copy_from(&second.q);
        t.view_mut((0, 0), (n1, n1)).copy_from(&first.t);
        t.view_mut((n1, n1), (n2, n2)).copy_from(&second.t);
        let mut blocks = first.blocks.clone();
        blocks.extend(second.blocks.iter().map(|&(s, k)| (s + n1, k)));
        RealSchur { q, t, blocks }
    }

    /// Schur form of `Aᵀ`, obtained by reversing the order of the Schur vectors:
    /// `Aᵀ = (QJ)(J Tᵀ J)(QJ)ᵀ` where `J` is the exchange matrix.
    pub fn transpose(&self) -> RealSchur {
        let n = self.order();
        let q = Mat::from_fn(n, n, |i, j| self.q[(i, n - 1 - j)]);
        let t = Mat::from_fn(n, n, |i, j| self.t[(n - 1 - j, n - 1 - i)]);
        let blocks = self
            .blocks
            .iter()
            .rev()
            .map(|&(s, k)| (n - s - k, k))
            .collect();
        RealSchur { q, t, blocks }
    }

    pub fn order(&self) -> usize {
        self.t.nrows()
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn t(&self) -> &Mat {
        &self.t
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Eigenvalues of a single diagonal block.
    pub fn block_eigenvalues(&self, block: Block) -> Vec<C64> {
        let (s, k) = block;
        if k == 1 {
            return vec![C64::new(self.t[(s, s)], 0.0)];
        }
        let (a, b, c, d) = (
            self.t[(s, s)],
            self.t[(s, s + 1)],
            self.t[(s + 1, s)],
            self.t[(s + 1, s + 1)],
        );
        let half_tr = 0.5 * (a + d);
        let half_diff = 0.5 * (a - d);
        let disc = half_diff * half_diff + b * c;
        if disc >= 0.0 {
            let r = disc.sqrt();
            vec![C64::new(half_tr + r, 0.0), C64::new(half_tr - r, 0.0)]
        } else {
            let im = (-disc).sqrt();
            vec![C64::new(half_tr, im), C64::new(half_tr, -im)]
        }
    }

    /// All eigenvalues in block order; complex pairs appear as `(λ, λ̄)` with `Im λ > 0` first.
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.blocks
            .iter()
            .flat_map(|&b| self.block_eigenvalues(b))
            .collect()
    }

    /// Largest real part of the spectrum.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Stability test with the relative margin used throughout: every eigenvalue
    /// must satisfy `Re λ ≤ -1e-12·‖A‖`.
    pub fn check_stable(&self) -> Result<()> {
        if self.order() == 0 {
            return Ok(());
        }
        let abscissa = self.spectral_abscissa();
        let scale = self.t.norm().max(f64::MIN_POSITIVE);
        if abscissa > -1e-12 * scale {
            return Err(MorError::NotStable { abscissa });
        }
        Ok(())
    }

    /// Solves `(s I - A) x = rhs` for complex `s` in `O(n²)`.
    pub fn solve_shifted(&self, s: C64, rhs: &CVec) -> CVec {
        let y = real_tr_mul(&self.q, rhs);
        let z = self.solve_shifted_triangular(s, y);
        real_mul(&self.q, &z)
    }

    fn solve_shifted_triangular(&self, s: C64, y: CVec) -> CVec {
        let view = RealSchurView {
            t: &self.t,
            blocks: &self.blocks,
        };
        view.solve_shifted_triangular(s, y, f64::EPSILON)
    }

    /// Right eigenvector of `A` for the eigenvalue `lambda` belonging to diagonal block `block`.
    pub fn eigenvector(&self, block_index: usize, lambda: C64) -> CVec {
        let n = self.order();
        let (st, k) = self.blocks[block_index];
        let mut z = CVec::zeros(n);
        if k == 1 {
            z[st] = C64::new(1.0, 0.0);
        } else {
            let (a, b, c, d) = (
                self.t[(st, st)],
                self.t[(st, st + 1)],
                self.t[(st + 1, st)],
                self.t[(st + 1, st + 1)],
            );
            // Null vector of [[a-λ, b], [c, d-λ]] from whichever row is better scaled.
            let from_first = (C64::new(b, 0.0), lambda - a);
            let from_second = (lambda - d, C64::new(c, 0.0));
            let (v1, v2) = if from_first.0.norm() + from_first.1.norm()
                >= from_second.0.norm() + from_second.1.norm()
            {
                from_first
            } else {
                from_second
            };
            z[st] = v1;
            z[st + 1] = v2;
        }
        // Remaining components: (λI - T_ii) z_i = Σ_{j>i} T_ij z_j for blocks above.
        let mut rhs = CVec::zeros(n);
        for i in 0..st {
            let mut acc = C64::new(0.0, 0.0);
            for j in st..st + k {
                acc += self.t[(i, j)] * z[j];
            }
            rhs[i] = acc;
        }
        let head_blocks = &self.blocks[..block_index];
        let head = RealSchurView {
            t: &self.t,
            blocks: head_blocks,
        };
        // Repeated eigenvalues make the shifted blocks singular; nudge the pivot.
        let solved = head.solve_shifted_triangular(lambda, rhs.rows(0, st).into_owned(), 1e3 * f64::EPSILON);
        z.rows_mut(0, st).copy_from(&solved);
        let x = real_mul(&self.q, &z);
        let nrm = x.norm();
        if nrm > 0.0 {
            x / C64::new(nrm, 0.0)
        } else {
            x
        }
    }
}

/// Leading principal part of a Schur factor, used for eigenvector back substitution.
struct RealSchurView<'a> {
    t: &'a Mat,
    blocks: &'a [Block],
}

impl RealSchurView<'_> {
    /// Back substitution with `(s I - T)`; `y` is overwritten with the solution.
    fn solve_shifted_triangular(&self, s: C64, mut y: CVec, rel_pivot: f64) -> CVec {
        let scale = self.t.amax().max(s.norm()).max(1.0);
        let tiny = rel_pivot * scale;
        for &(st, k) in self.blocks.iter().rev() {
            if k == 1 {
                let mut d = s - self.t[(st, st)];
                if d.norm() < tiny {
                    d = C64::new(tiny, 0.0);
                }
                let xi = y[st] / d;
                y[st] = xi;
                for i in 0..st {
                    y[i] += self.t[(i, st)] * xi;
                }
            } else {
                let a11 = s - self.t[(st, st)];
                let a12 = C64::new(-self.t[(st, st + 1)], 0.0);
                let a21 = C64::new(-self.t[(st + 1, st)], 0.0);
                let a22 = s - self.t[(st + 1, st + 1)];
                let mut det = a11 * a22 - a12 * a21;
                if det.norm() < tiny * tiny {
                    det = C64::new(tiny * tiny, 0.0);
                }
                let (r1, r2) = (y[st], y[st + 1]);
                y[st] = (a22 * r1 - a12 * r2) / det;
                y[st + 1] = (a11 * r2 - a21 * r1) / det;
                let (x1, x2) = (y[st], y[st + 1]);
                for i in 0..st {
                    y[i] += self.t[(i, st)] * x1 + self.t[(i, st + 1)] * x2;
                }
            }
        }
        y
    }
}

/// `M v` for real `M` and complex `v`.
pub fn real_mul(m: &Mat, v: &CVec) -> CVec {
    let re = m * v.map(|z| z.re);
    let im = m * v.map(|z| z.im);
    CVec::from_fn(m.nrows(), |i, _| C64::new(re[i], im[i]))
}

/// `Mᵀ v` for real `M` and complex `v`.
pub fn real_tr_mul(m: &Mat, v: &CVec) -> CVec {
    let re = m.tr_mul(&v.map(|z| z.re));
    let im = m.tr_mul(&v.map(|z| z.im));
    CVec::from_fn(m.ncols(), |i, _| C64::new(re[i], im[i]))
}

/// Complexifies a real vector.
pub fn to_complex(v: &DVector<f64>) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

/// Complexifies a real matrix.
pub fn to_complex_mat(m: &Mat) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}
