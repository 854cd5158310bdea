use super::{bt_reduce_with, irka_reduce, resolve_order, IrkaOptions, OrderSelection, ReducedModel};
use crate::error::{MorError, Result};
use crate::gramians::{gramian_factors, hankel_spectrum};
use crate::model::{InitialConditionBasis, Realization, StateSpaceModel};

/// Reduction used for the initial-condition map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum X0Method {
    Bt,
    Irka(IrkaOptions),
}

/// Independent reductions of the input-to-output and initial-condition-to-output maps.
#[derive(Debug, Clone)]
pub struct SplitReducedModel {
    /// Reduced `(A, B, C)`.
    pub suy: ReducedModel,
    /// Reduced `(A, X₀, C)`.
    pub sxy: ReducedModel,
    pub basis: InitialConditionBasis,
    /// The full `(A, X₀, C)`, kept for error bounds.
    pub sx0y: StateSpaceModel,
    /// Hankel singular values of `sx0y`.
    pub theta: Vec<f64>,
}

/// Reduces `(A, B, C)` by BT and `(A, X₀, C)` by `x0_method`, concurrently.
pub fn split_reduce(
    m: &StateSpaceModel,
    basis: &InitialConditionBasis,
    sel_u: OrderSelection,
    sel_x0: OrderSelection,
    x0_method: X0Method,
) -> Result<SplitReducedModel> {
    if basis.dim() != m.order() {
        return Err(MorError::DimensionMismatch(format!(
            "basis has {} rows, model has order {}",
            basis.dim(),
            m.order()
        )));
    }
    let sx0y = m.with_input(basis.matrix().clone())?;
    let (suy, sxy) = rayon::join(
        || {
            let f = gramian_factors(m)?;
            let hs = hankel_spectrum(&f);
            bt_reduce_with(m, &f, &hs, sel_u)
        },
        || reduce_x0_map(&sx0y, sel_x0, x0_method),
    );
    let suy = suy.map_err(|e| e.in_branch("Suy"))?;
    let (sxy, theta) = sxy.map_err(|e| e.in_branch("Sx0y"))?;
    Ok(SplitReducedModel {
        suy,
        sxy,
        basis: basis.clone(),
        sx0y,
        theta,
    })
}

fn reduce_x0_map(
    sx0y: &StateSpaceModel,
    sel: OrderSelection,
    method: X0Method,
) -> Result<(ReducedModel, Vec<f64>)> {
    let f = gramian_factors(sx0y)?;
    let hs = hankel_spectrum(&f);
    let reduced = match method {
        X0Method::Bt => bt_reduce_with(sx0y, &f, &hs, sel)?,
        X0Method::Irka(opts) => {
            let r = resolve_order(&hs.sigma, sel, hs.numerical_rank())?;
            irka_reduce(sx0y, r.min(sx0y.order() - 1), opts)?
        }
    };
    Ok((reduced, hs.sigma))
}
