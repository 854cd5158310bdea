//! A posteriori and a priori output error bounds.

use crate::error::{MorError, Result, Warning};
use crate::gramians::{balance_realization, BalancedRealization};
use crate::linalg::{solve_sylvester, Mat};
use crate::model::{InitialConditionBasis, Realization, StateSpaceModel};
use crate::reduction::{h2_error_norm, Method, ReducedModel, SplitReducedModel};

/// `2 Σ tail · ‖u‖_{L2}`.
pub fn bt_bound(tail: &[f64], u_l2: f64) -> f64 {
    2.0 * tail.iter().sum::<f64>() * u_l2
}

/// `‖h − h̃‖_{H2} · ‖u‖_{L2}`, a bound on the L∞ output error.
pub fn irka_linf_bound(m: &StateSpaceModel, r: &ReducedModel, u_l2: f64) -> Result<f64> {
    Ok(h2_error_norm(m, r)? * u_l2)
}

/// The two additive terms of the augmented BT bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbtBound {
    pub input_term: f64,
    pub initial_term: f64,
    /// Initial-condition term of the fully balanced variant, when its data was computed.
    pub fully_balanced_initial_term: Option<f64>,
}

impl AbtBound {
    pub fn total(&self) -> f64 {
        self.input_term + self.initial_term
    }
}

/// Output error bound for a model from [`crate::reduction::abt_reduce`].
///
/// `z0_norm` is measured in coordinates of the unscaled `basis`.
pub fn abt_bound(
    m: &StateSpaceModel,
    r_abt: &ReducedModel,
    basis: &InitialConditionBasis,
    u_l2: f64,
    z0_norm: f64,
) -> Result<AbtBound> {
    let (Method::Abt, Some(data), Some(x0r)) = (r_abt.method, r_abt.abt.as_ref(), r_abt.x0.as_ref()) else {
        return Err(MorError::MissingProvenance("abt_bound"));
    };
    if basis.dim() != m.order() || x0r.ncols() != basis.n0() {
        return Err(MorError::DimensionMismatch(
            "basis does not match the augmented reduction".into(),
        ));
    }
    let tail = r_abt.tail_sum();
    let input_term = 2.0 * tail * u_l2;
    // The bound is stated for the scaled basis s·X₀, whose coordinates are z₀/s.
    let z0s = z0_norm / data.scale;
    let mut s_ax0 = &r_abt.a * x0r * data.scale;
    for (i, eta) in r_abt.hankel.iter().take(r_abt.a.nrows()).enumerate() {
        s_ax0.row_mut(i).scale_mut(eta.sqrt());
    }
    let reduced_norm = spectral_norm(&s_ax0);
    let initial_term = 3.0 * 2f64.powf(-1.0 / 3.0) * (data.lax0_norm + reduced_norm).cbrt() * tail.powf(2.0 / 3.0) * z0s;
    let fully_balanced_initial_term = data
        .fully_balanced
        .map(|(sa, x0)| 3.0 * sa.cbrt() * x0.cbrt() * tail.powf(2.0 / 3.0) * z0s);
    Ok(AbtBound {
        input_term,
        initial_term,
        fully_balanced_initial_term,
    })
}

fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.singular_values().max()
    }
}

/// Balanced realization split after the first `r` states, with the Sylvester
/// solution `Y = [Y₁; Y₂]` of `Aᵀ Y + Y A₁₁ + Cᵀ C₁ = 0` and `T = B₂B₂ᵀ + 2 Y₂ A₁₂`.
#[derive(Debug, Clone)]
pub struct BalancedPartition {
    pub a11: Mat,
    pub a12: Mat,
    pub a21: Mat,
    pub a22: Mat,
    pub b1: Mat,
    pub b2: Mat,
    pub c1: Mat,
    pub c2: Mat,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
    pub y1: Mat,
    pub y2: Mat,
    pub t: Mat,
}

/// Hankel-value bound on the H2 error of balanced truncation of `(A, X₀, C)`.
#[derive(Debug, Clone)]
pub struct AcaBound {
    /// `sqrt(trace(T Θ₂))`, clamped at zero.
    pub bound: f64,
    /// `trace(B₂B₂ᵀ Θ₂)`
    pub linear: f64,
    /// `trace(2 Y₂ A₁₂ Θ₂)`
    pub quadratic: f64,
    pub partition: BalancedPartition,
    pub warnings: Vec<Warning>,
}

pub fn aca_bound(sx0y: &StateSpaceModel, r_x0: usize) -> Result<AcaBound> {
    aca_bound_balanced(&balance_realization(sx0y)?, r_x0)
}

/// [`aca_bound`] from an existing balanced realization.
pub fn aca_bound_balanced(bal: &BalancedRealization, r_x0: usize) -> Result<AcaBound> {
    let k = bal.order();
    let r = r_x0.min(k);
    let q = k - r;
    let (ab, bb, cb) = (&bal.ab, &bal.bb, &bal.cb);
    let a11 = ab.view((0, 0), (r, r)).into_owned();
    let c1 = cb.columns(0, r).into_owned();
    let kmat = cb.transpose() * &c1;
    let y = if r == 0 {
        Mat::zeros(k, 0)
    } else {
        solve_sylvester(&ab.transpose(), &a11, &kmat)?
    };
    let partition = BalancedPartition {
        a11,
        a12: ab.view((0, r), (r, q)).into_owned(),
        a21: ab.view((r, 0), (q, r)).into_owned(),
        a22: ab.view((r, r), (q, q)).into_owned(),
        b1: bb.rows(0, r).into_owned(),
        b2: bb.rows(r, q).into_owned(),
        c1,
        c2: cb.columns(r, q).into_owned(),
        theta1: bal.theta[..r].to_vec(),
        theta2: bal.theta[r..].to_vec(),
        y1: y.rows(0, r).into_owned(),
        y2: y.rows(r, q).into_owned(),
        t: Mat::zeros(q, q),
    };
    let b2b2 = &partition.b2 * partition.b2.transpose();
    let y2a12 = &partition.y2 * &partition.a12 * 2.0;
    let diag_trace = |m: &Mat| -> f64 { (0..q).map(|i| m[(i, i)] * partition.theta2[i]).sum() };
    let linear = diag_trace(&b2b2);
    let quadratic = diag_trace(&y2a12);
    let partition = BalancedPartition {
        t: b2b2 + y2a12,
        ..partition
    };
    let value = linear + quadratic;
    let mut warnings = bal.warnings.clone();
    if value < 0.0 {
        log::warn!("trace(T Θ₂) = {value:.3e} clamped to zero");
        warnings.push(Warning::NegativeTrace { value });
    }
    Ok(AcaBound {
        bound: value.max(0.0).sqrt(),
        linear,
        quadratic,
        partition,
        warnings,
    })
}

/// Which quantity bounds the initial-condition part of the split error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum E2Source {
    /// `sqrt(trace(T Θ₂))` from balanced truncation.
    HankelTrace,
    /// Exact `‖h_x − h̃_x‖_{H2}`, used when the map was reduced by IRKA.
    H2Error,
}

/// `‖y − ỹ‖_{L2} ≤ e₁ ‖u‖_{L2} + e₂ ‖z₀‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBudget {
    pub e1: f64,
    pub e2: f64,
    pub e2_source: E2Source,
    pub warnings: Vec<Warning>,
}

impl ErrorBudget {
    pub fn total(&self, u_l2: f64, z0_norm: f64) -> f64 {
        self.e1 * u_l2 + self.e2 * z0_norm
    }
}

pub fn error_budget(s: &SplitReducedModel) -> Result<ErrorBudget> {
    if s.suy.method != Method::Bt {
        return Err(MorError::MissingProvenance("split_bound (input map must come from BT)"));
    }
    let e1 = 2.0 * s.suy.tail_sum();
    let (e2, e2_source, warnings) = match s.sxy.method {
        Method::Bt => {
            let aca = aca_bound(&s.sx0y, s.sxy.a.nrows())?;
            (aca.bound, E2Source::HankelTrace, aca.warnings)
        }
        _ => (h2_error_norm(&s.sx0y, &s.sxy)?, E2Source::H2Error, Vec::new()),
    };
    Ok(ErrorBudget {
        e1,
        e2,
        e2_source,
        warnings,
    })
}

pub fn split_bound(s: &SplitReducedModel, u_l2: f64, z0_norm: f64) -> Result<(f64, ErrorBudget)> {
    let budget = error_budget(s)?;
    Ok((budget.total(u_l2, z0_norm), budget))
}
