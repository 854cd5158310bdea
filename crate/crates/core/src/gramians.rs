//! Gramian square-root factors, Hankel singular values, balancing and H2 norms.

use log::warn;
use nalgebra::{Cholesky, SymmetricEigen};

use crate::error::{MorError, Result, Warning};
use crate::linalg::{solve_lyapunov_schur, solve_sylvester_schur, Mat, RealSchur};
use crate::model::{Realization, StateSpaceModel};

/// Hankel singular values below this fraction of `σ₁` are treated as zero.
pub const DEFLATION_TOL: f64 = 1e-12;
/// Balancing transforms with a larger condition estimate trigger a warning.
pub const BALANCING_COND_WARN: f64 = 1e8;

/// `P = U Uᵀ` and `Q = L Lᵀ` together with the Gramians themselves.
#[derive(Debug, Clone)]
pub struct GramianFactors {
    pub p: Mat,
    pub q: Mat,
    pub u: Mat,
    pub l: Mat,
}

/// Descending Hankel singular values with the SVD factors of `Uᵀ L = Z Σ Yᵀ`.
#[derive(Debug, Clone)]
pub struct HankelSpectrum {
    pub sigma: Vec<f64>,
    pub z: Mat,
    pub y: Mat,
}

impl HankelSpectrum {
    /// Number of values above `DEFLATION_TOL · σ₁`.
    pub fn numerical_rank(&self) -> usize {
        let top = self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().take_while(|&&s| s > DEFLATION_TOL * top).count()
    }
}

/// Solves both Lyapunov equations (concurrently) and factors the solutions.
pub fn gramian_factors(m: &StateSpaceModel) -> Result<GramianFactors> {
    let bbt = m.b() * m.b().transpose();
    let ctc = m.c().transpose() * m.c();
    let at = m.schur().transpose();
    let (p, q) = rayon::join(
        || solve_lyapunov_schur(m.schur(), &bbt),
        || solve_lyapunov_schur(&at, &ctc),
    );
    let (p, q) = (p?, q?);
    let (u, l) = (sqrt_factor(&p)?, sqrt_factor(&q)?);
    Ok(GramianFactors { p, q, u, l })
}

/// Square-root factor `F` with `G = F Fᵀ`: Cholesky when it succeeds, else a
/// clipped eigendecomposition for numerically semidefinite `G`.
pub fn sqrt_factor(g: &Mat) -> Result<Mat> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(MorError::FactorizationFailure("non-finite Gramian".into()));
    }
    if let Some(ch) = Cholesky::new(g.clone()) {
        let f = ch.unpack();
        if f.iter().all(|v| v.is_finite()) {
            return Ok(f);
        }
    }
    let eig = SymmetricEigen::new(g.clone());
    let top = eig.eigenvalues.amax();
    let floor = -1e-8 * top.max(f64::MIN_POSITIVE);
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        return Err(MorError::FactorizationFailure(format!(
            "Gramian is indefinite (min eigenvalue {:e}, max {:e})",
            eig.eigenvalues.min(),
            top
        )));
    }
    let mut f = eig.eigenvectors;
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        f.column_mut(j).scale_mut(lam.max(0.0).sqrt());
    }
    Ok(f)
}

pub fn hankel_spectrum(f: &GramianFactors) -> HankelSpectrum {
    let svd = (f.u.transpose() * &f.l).svd(true, true);
    HankelSpectrum {
        sigma: svd.singular_values.iter().copied().collect(),
        z: svd.u.expect("requested"),
        y: svd.v_t.expect("requested").transpose(),
    }
}

/// A realization whose Gramians are both `diag(θ)`.
#[derive(Debug, Clone)]
pub struct BalancedRealization {
    pub ab: Mat,
    pub bb: Mat,
    pub cb: Mat,
    pub theta: Vec<f64>,
    /// `n × k` map from balanced to original coordinates.
    pub tbal: Mat,
    /// `k × n` left inverse of `tbal`.
    pub tbal_inv: Mat,
    pub cond: f64,
    /// Order before deflating numerically zero Hankel singular values.
    pub original_order: usize,
    pub warnings: Vec<Warning>,
}

impl BalancedRealization {
    pub fn order(&self) -> usize {
        self.theta.len()
    }

    pub fn to_model(&self) -> Result<StateSpaceModel> {
        StateSpaceModel::new(self.ab.clone(), self.bb.clone(), self.cb.clone())
    }
}

pub fn balance_realization(m: &StateSpaceModel) -> Result<BalancedRealization> {
    let f = gramian_factors(m)?;
    let hs = hankel_spectrum(&f);
    balance_from(m, &f, &hs)
}

/// Balancing from precomputed factors; trailing values below `DEFLATION_TOL·σ₁` are dropped.
pub fn balance_from(m: &StateSpaceModel, f: &GramianFactors, hs: &HankelSpectrum) -> Result<BalancedRealization> {
    let k = hs.numerical_rank();
    let inv_sqrt: Vec<f64> = hs.sigma[..k].iter().map(|s| 1.0 / s.sqrt()).collect();
    let mut tbal = &f.u * hs.z.columns(0, k);
    let mut w = &f.l * hs.y.columns(0, k);
    for (j, s) in inv_sqrt.iter().enumerate() {
        tbal.column_mut(j).scale_mut(*s);
        w.column_mut(j).scale_mut(*s);
    }
    let tbal_inv = w.transpose();
    let ab = &tbal_inv * m.a() * &tbal;
    let bb = &tbal_inv * m.b();
    let cb = m.c() * &tbal;
    let cond = if k == 0 {
        1.0
    } else {
        spectral_norm(&tbal) * spectral_norm(&tbal_inv)
    };
    let mut warnings = Vec::new();
    if cond > BALANCING_COND_WARN {
        warn!("balancing transform condition estimate {cond:.3e}");
        warnings.push(Warning::IllConditionedBalancing { cond });
    }
    Ok(BalancedRealization {
        ab,
        bb,
        cb,
        theta: hs.sigma[..k].to_vec(),
        tbal,
        tbal_inv,
        cond,
        original_order: m.order(),
        warnings,
    })
}

fn spectral_norm(m: &Mat) -> f64 {
    m.singular_values().max()
}

/// `‖h‖_{H2} = sqrt(trace(C P Cᵀ))`.
pub fn h2_norm(m: &StateSpaceModel) -> Result<f64> {
    let bbt = m.b() * m.b().transpose();
    let p = solve_lyapunov_schur(m.schur(), &bbt)?;
    Ok((m.c() * p * m.c().transpose()).trace().max(0.0).sqrt())
}

/// H2 norm of `h − h̃` for a reduced realization of `full`.
///
/// When the reduced model came from a projection `x ≈ V x̃`, the error system
/// is written in the coordinates `(x − V x̃, x̃)`. Its Gramian then carries the
/// error energy directly instead of as a difference of two nearly equal
/// traces, which keeps small errors accurate.
pub fn h2_error_between(full: &StateSpaceModel, reduced: &dyn Realization, v: Option<&Mat>) -> Result<f64> {
    if full.inputs() != reduced.inputs() || full.outputs() != reduced.outputs() {
        return Err(MorError::DimensionMismatch(format!(
            "full model is {}x{} (outputs x inputs), reduced is {}x{}",
            full.outputs(),
            full.inputs(),
            reduced.outputs(),
            reduced.inputs()
        )));
    }
    let (n, r) = (full.order(), reduced.order());
    let v = match v {
        Some(v) if v.nrows() == n && v.ncols() == r => v.clone(),
        Some(v) => {
            return Err(MorError::DimensionMismatch(format!(
                "projection basis is {}x{}, expected {}x{}",
                v.nrows(),
                v.ncols(),
                n,
                r
            )))
        }
        None => Mat::zeros(n, r),
    };
    let (a, b, c) = (full.a(), full.b(), full.c());
    let (ar, br, cr) = (reduced.a(), reduced.b(), reduced.c());

    let b1 = b - &v * br;
    let d = c * &v - cr;
    let mut rhs11 = &b1 * b1.transpose();
    let mut cross = 0.0;
    let mut reduced_part = 0.0;
    if r > 0 {
        let sr = RealSchur::new(ar)?;
        sr.check_stable()?;
        let p22 = solve_lyapunov_schur(&sr, &(br * br.transpose()))?;
        let g = a * &v - &v * ar;
        let k12 = &g * &p22 + &b1 * br.transpose();
        let p12 = solve_sylvester_schur(full.schur(), &sr.transpose(), &k12)?;
        let gp = &g * p12.transpose();
        rhs11 += &gp + gp.transpose();
        cross = 2.0 * (c * &p12 * d.transpose()).trace();
        reduced_part = (&d * &p22 * d.transpose()).trace();
    }
    let p11 = solve_lyapunov_schur(full.schur(), &rhs11)?;
    let total = (c * p11 * c.transpose()).trace() + cross + reduced_part;
    if total < 0.0 {
        warn!("negative squared H2 error {total:.3e} clamped to zero");
    }
    Ok(total.max(0.0).sqrt())
}
