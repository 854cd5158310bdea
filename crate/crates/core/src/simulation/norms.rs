use std::fmt::Write as _;
use std::path::Path;

use super::SimulationTrace;
use crate::error::{MorError, Result, Warning};

/// Trapezoidal `(∫₀^{T_f} ‖y(t)‖² dt)^{1/2}`; logs a warning when the trace has not decayed.
pub fn l2_norm(tr: &SimulationTrace) -> f64 {
    if let Some(w) = tail_warning(tr) {
        log::warn!("{w}");
    }
    let sq: Vec<f64> = tr.y.column_iter().map(|c| c.norm_squared()).collect();
    let Some((first, last)) = sq.first().zip(sq.last()) else {
        return 0.0;
    };
    let inner: f64 = sq[1..sq.len() - 1].iter().sum();
    (tr.grid.dt * (0.5 * (first + last) + inner)).sqrt()
}

/// Conservative estimate of the quadrature error in [`l2_norm`]: the difference
/// between the trapezoidal integrals of `‖y‖²` with steps `Δt` and `2Δt`
/// (three times the asymptotic error), carried through the square root.
pub fn l2_quadrature_error(tr: &SimulationTrace) -> f64 {
    let sq: Vec<f64> = tr.y.column_iter().map(|c| c.norm_squared()).collect();
    let even = (sq.len().saturating_sub(1)) & !1;
    if even < 2 {
        return 0.0;
    }
    let trap = |stride: usize| {
        let pts: Vec<f64> = sq[..=even].iter().step_by(stride).copied().collect();
        let inner: f64 = pts[1..pts.len() - 1].iter().sum();
        stride as f64 * tr.grid.dt * (0.5 * (pts[0] + pts[pts.len() - 1]) + inner)
    };
    let (fine, coarse) = (trap(1), trap(2));
    let d = (fine - coarse).abs();
    (fine + d).sqrt() - fine.sqrt()
}

/// Largest absolute output sample.
pub fn linf_norm(tr: &SimulationTrace) -> f64 {
    tr.y.amax()
}

/// `Tail` warning when the last sample exceeds `1e-6` of the peak.
pub fn tail_warning(tr: &SimulationTrace) -> Option<Warning> {
    let peak = tr.y.amax();
    if peak == 0.0 {
        return None;
    }
    let last = tr.y.column(tr.y.ncols() - 1).amax();
    let ratio = last / peak;
    (ratio >= 1e-6).then_some(Warning::Tail { ratio })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeErrors {
    pub rel_l2: f64,
    pub rel_linf: f64,
}

pub fn relative_errors(full: &SimulationTrace, reduced: &SimulationTrace) -> Result<RelativeErrors> {
    let diff = full.difference(reduced)?;
    let (l2, linf) = (l2_norm(full), linf_norm(full));
    if l2 < 1e-300 || linf < 1e-300 {
        return Err(MorError::DegenerateReference);
    }
    Ok(RelativeErrors {
        rel_l2: l2_norm(&diff) / l2,
        rel_linf: linf_norm(&diff) / linf,
    })
}

/// CSV with header `t,y1,…,yp` followed by `yu_*,yx0_*` when components are present.
pub fn to_csv(tr: &SimulationTrace) -> String {
    let p = tr.outputs();
    let mut out = String::from("t");
    for i in 1..=p {
        let _ = write!(out, ",y{i}");
    }
    if tr.components.is_some() {
        for prefix in ["yu", "yx0"] {
            for i in 1..=p {
                let _ = write!(out, ",{prefix}_{i}");
            }
        }
    }
    out.push('\n');
    for (k, t) in tr.grid.times().enumerate() {
        let _ = write!(out, "{t:e}");
        for v in tr.y.column(k).iter() {
            let _ = write!(out, ",{v:e}");
        }
        if let Some((yu, yx)) = &tr.components {
            for v in yu.column(k).iter().chain(yx.column(k).iter()) {
                let _ = write!(out, ",{v:e}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(tr: &SimulationTrace, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(tr))?;
    Ok(())
}
