use nalgebra::DMatrix;

use super::{resolve_order, AbtData, Method, OrderSelection, ProjectionPair, ReducedModel};
use crate::error::Result;
use crate::gramians::{balance_from, gramian_factors, hankel_spectrum, GramianFactors, HankelSpectrum};
use crate::linalg::Mat;
use crate::model::{InitialConditionBasis, Realization, StateSpaceModel};

/// Square-root balanced truncation.
pub fn bt_reduce(m: &StateSpaceModel, sel: OrderSelection) -> Result<ReducedModel> {
    let f = gramian_factors(m)?;
    let hs = hankel_spectrum(&f);
    bt_reduce_with(m, &f, &hs, sel)
}

/// [`bt_reduce`] from precomputed Gramian factors and Hankel spectrum.
pub fn bt_reduce_with(
    m: &StateSpaceModel,
    f: &GramianFactors,
    hs: &HankelSpectrum,
    sel: OrderSelection,
) -> Result<ReducedModel> {
    let r = resolve_order(&hs.sigma, sel, hs.numerical_rank())?;
    let mut v = &f.u * hs.z.columns(0, r);
    let mut w = &f.l * hs.y.columns(0, r);
    for j in 0..r {
        let s = 1.0 / hs.sigma[j].sqrt();
        v.column_mut(j).scale_mut(s);
        w.column_mut(j).scale_mut(s);
    }
    let projection = ProjectionPair {
        v,
        w,
        biorthogonal: true,
    };
    let mut reduced = ReducedModel::project(m, projection, Method::Bt)?;
    reduced.hankel = hs.sigma.clone();
    Ok(reduced)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbtOptions {
    /// Scale `X₀` so its 2-norm equals the largest column norm of `B`.
    pub scaling: bool,
    /// Also compute the quantities for the fully balanced variant of the bound.
    pub fully_balanced: bool,
}

impl Default for AbtOptions {
    fn default() -> Self {
        Self {
            scaling: true,
            fully_balanced: false,
        }
    }
}

/// Balanced truncation of `(A, [B, s X₀], C)`.
pub fn abt_reduce(
    m: &StateSpaceModel,
    basis: &InitialConditionBasis,
    sel: OrderSelection,
    opts: AbtOptions,
) -> Result<ReducedModel> {
    let x0 = basis.matrix();
    let (aug, scale) = augmented_input(m, basis, opts.scaling)?;
    let x0s = x0 * scale;

    let f = gramian_factors(&aug)?;
    let hs = hankel_spectrum(&f);
    let mut reduced = bt_reduce_with(&aug, &f, &hs, sel)?;
    let w = &reduced.projection.w;
    reduced.b = w.tr_mul(m.b());
    reduced.x0 = Some(w.tr_mul(x0));
    reduced.method = Method::Abt;

    let lax0_norm = spectral_norm(&f.l.tr_mul(&(m.a() * &x0s)));
    let fully_balanced = if opts.fully_balanced {
        let bal = balance_from(&aug, &f, &hs)?;
        let mut scaled_a = bal.ab.clone();
        for (i, th) in bal.theta.iter().enumerate() {
            scaled_a.row_mut(i).scale_mut(th.sqrt());
        }
        reduced.warnings.extend(bal.warnings.iter().cloned());
        Some((spectral_norm(&scaled_a), spectral_norm(&(&bal.tbal_inv * &x0s))))
    } else {
        None
    };
    reduced.abt = Some(AbtData {
        scale,
        lax0_norm,
        fully_balanced,
    });
    Ok(reduced)
}

/// `(A, [B  s·X₀], C)` and the factor `s`, which matches the largest column norm
/// of `B` to `‖X₀‖₂` when `scaling` is set and is 1 otherwise.
pub fn augmented_input(
    m: &StateSpaceModel,
    basis: &InitialConditionBasis,
    scaling: bool,
) -> Result<(StateSpaceModel, f64)> {
    let x0 = basis.matrix();
    if x0.nrows() != m.order() {
        return Err(crate::error::MorError::DimensionMismatch(format!(
            "basis has {} rows, model has order {}",
            x0.nrows(),
            m.order()
        )));
    }
    let scale = if scaling && basis.n0() > 0 {
        let bmax = m.b().column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        let xnorm = spectral_norm(x0);
        if bmax > 0.0 && xnorm > 0.0 {
            bmax / xnorm
        } else {
            1.0
        }
    } else {
        1.0
    };
    let n_in = m.inputs();
    let mut b_aug = Mat::zeros(m.order(), n_in + basis.n0());
    b_aug.columns_mut(0, n_in).copy_from(m.b());
    b_aug.columns_mut(n_in, basis.n0()).copy_from(&(x0 * scale));
    Ok((m.with_input(b_aug)?, scale))
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}
