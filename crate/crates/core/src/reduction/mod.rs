//! Balanced truncation, augmented BT, IRKA and the split method.

mod bt;
mod irka;
mod split;

pub use bt::{abt_reduce, augmented_input, bt_reduce, bt_reduce_with, AbtOptions};
pub use irka::{irka_reduce, HermiteResiduals, IrkaInfo, IrkaOptions, Node};
pub use split::{split_reduce, SplitReducedModel, X0Method};

use std::fmt;

use crate::error::{MorError, Result, Warning};
use crate::gramians::h2_error_between;
use crate::linalg::{Mat, RealSchur};
use crate::model::{Realization, StateSpaceModel};

/// How the reduced order is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderSelection {
    Fixed(usize),
    /// Truncate once `σ_{r+1}/σ₁` drops below the tolerance.
    Tolerance(f64),
}

impl OrderSelection {
    pub fn validate(&self) -> Result<()> {
        match *self {
            OrderSelection::Fixed(_) => Ok(()),
            OrderSelection::Tolerance(t) if t > 0.0 && t < 1.0 => Ok(()),
            OrderSelection::Tolerance(t) => Err(MorError::InvalidParameter(format!(
                "tolerance must lie in (0, 1), got {t}"
            ))),
        }
    }
}

/// Smallest `r` with `σ_{r+1}/σ₁ < τ` (with `σ_{n+1} = 0`); zero when `σ₁ = 0`.
pub fn order_from_tolerance(sigma: &[f64], tau: f64) -> usize {
    let Some(&top) = sigma.first() else {
        return 0;
    };
    if top <= 0.0 {
        return 0;
    }
    let r = (0..sigma.len())
        .find(|&r| sigma[r] / top < tau)
        .unwrap_or(sigma.len());
    push_past_ties(sigma, r)
}

/// Moves the cut right until `σ_r > σ_{r+1}` holds strictly.
fn push_past_ties(sigma: &[f64], mut r: usize) -> usize {
    while r > 0 && r < sigma.len() && sigma[r - 1] <= sigma[r] {
        r += 1;
    }
    r
}

/// Order implied by `sel` for the spectrum `sigma`, capped at the numerical rank `rank`.
pub(crate) fn resolve_order(sigma: &[f64], sel: OrderSelection, rank: usize) -> Result<usize> {
    sel.validate()?;
    let r = match sel {
        OrderSelection::Fixed(r) => {
            if r > sigma.len() {
                return Err(MorError::InvalidParameter(format!(
                    "order {r} exceeds system order {}",
                    sigma.len()
                )));
            }
            push_past_ties(sigma, r)
        }
        OrderSelection::Tolerance(tau) => order_from_tolerance(sigma, tau),
    };
    if r > rank {
        log::warn!("order {r} capped at numerical rank {rank}");
    }
    Ok(r.min(rank))
}

/// Reduction method that produced a [`ReducedModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bt,
    Abt,
    Irka,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bt => "bt",
            Method::Abt => "abt",
            Method::Irka => "irka",
        })
    }
}

/// Petrov–Galerkin pair: `Ã = Wᵀ A V`, `B̃ = Wᵀ B`, `C̃ = C V`.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub v: Mat,
    pub w: Mat,
    pub biorthogonal: bool,
}

impl ProjectionPair {
    /// `‖WᵀV − I‖_F`.
    pub fn biorthogonality_error(&self) -> f64 {
        let r = self.v.ncols();
        (self.w.tr_mul(&self.v) - Mat::identity(r, r)).norm()
    }
}

/// Extra data kept by augmented BT for its error bound.
#[derive(Debug, Clone)]
pub struct AbtData {
    /// Factor `s` applied to `X₀` inside the augmented input map.
    pub scale: f64,
    /// `‖Lᵀ A (s X₀)‖₂` with `Q = L Lᵀ`.
    pub lax0_norm: f64,
    /// `‖Σ^{1/2} A_b‖₂` and `‖T⁻¹ s X₀‖₂` in fully balanced coordinates, when requested.
    pub fully_balanced: Option<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    /// `Wᵀ X₀` for the unscaled basis (augmented BT only).
    pub x0: Option<Mat>,
    pub method: Method,
    pub projection: ProjectionPair,
    /// Full Hankel spectrum (`σ`, `θ` or `η`) of the system that was reduced; empty for IRKA.
    pub hankel: Vec<f64>,
    pub abt: Option<AbtData>,
    pub irka: Option<IrkaInfo>,
    pub warnings: Vec<Warning>,
}

impl ReducedModel {
    /// Projects `m` with `(V, W)`, checking stability of the result.
    pub(crate) fn project(m: &StateSpaceModel, projection: ProjectionPair, method: Method) -> Result<Self> {
        let (v, w) = (&projection.v, &projection.w);
        let a = w.tr_mul(&(m.a() * v));
        let b = w.tr_mul(m.b());
        let c = m.c() * v;
        let reduced = Self {
            a,
            b,
            c,
            x0: None,
            method,
            projection,
            hankel: Vec::new(),
            abt: None,
            irka: None,
            warnings: Vec::new(),
        };
        reduced.check_stable()?;
        Ok(reduced)
    }

    pub fn check_stable(&self) -> Result<()> {
        if self.a.iter().any(|v| !v.is_finite()) {
            return Err(MorError::NonFinite("reduced state matrix"));
        }
        RealSchur::new(&self.a)?.check_stable()
    }

    /// Truncated Hankel values `(σ_{r+1}, …)`.
    pub fn spectrum_tail(&self) -> &[f64] {
        self.hankel.get(self.order()..).unwrap_or(&[])
    }

    pub fn tail_sum(&self) -> f64 {
        self.spectrum_tail().iter().sum()
    }

    /// Reduced model as a standalone [`StateSpaceModel`]; fails for order 0.
    pub fn to_model(&self) -> Result<StateSpaceModel> {
        StateSpaceModel::new(self.a.clone(), self.b.clone(), self.c.clone())
    }
}

impl Realization for ReducedModel {
    fn a(&self) -> &Mat {
        &self.a
    }
    fn b(&self) -> &Mat {
        &self.b
    }
    fn c(&self) -> &Mat {
        &self.c
    }
}

/// `‖h − h̃‖_{H2}` for a reduced model of `full`, using its projection basis.
///
/// For augmented BT the reduced input map is compared against `B` alone.
pub fn h2_error_norm(full: &StateSpaceModel, reduced: &ReducedModel) -> Result<f64> {
    let v = &reduced.projection.v;
    let v = (v.nrows() == full.order()).then_some(v);
    h2_error_between(full, reduced, v)
}
