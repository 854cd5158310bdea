//! Mass-spring-damper chain benchmark.
//!
//! States are interleaved as `(q₁, p₁, q₂, p₂, …)`: position and momentum of
//! each mass, so `n = 2·n_masses`. Every mass is tied to its neighbours and to
//! the ground by springs of stiffness `k` and damped to the ground by `d`:
//!
//! ```text
//! q̇ᵢ = pᵢ / m
//! ṗᵢ = -(K q)ᵢ - (d/m) pᵢ + uᵢ      (i ≤ n_inputs)
//! y  = p₁
//! ```

use crate::error::{MorError, Result};
use crate::linalg::Mat;
use crate::model::StateSpaceModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsdParams {
    pub n_masses: usize,
    pub mass: f64,
    pub stiffness: f64,
    pub damping: f64,
    pub n_inputs: usize,
}

impl Default for MsdParams {
    fn default() -> Self {
        Self {
            n_masses: 150,
            mass: 1.0,
            stiffness: 2.0,
            damping: 0.1,
            n_inputs: 10,
        }
    }
}

impl MsdParams {
    pub fn with_masses(n_masses: usize) -> Self {
        Self {
            n_masses,
            n_inputs: Self::default().n_inputs.min(n_masses),
            ..Self::default()
        }
    }
}

pub fn build_msd(params: &MsdParams) -> Result<StateSpaceModel> {
    let MsdParams {
        n_masses: nm,
        mass: m,
        stiffness: k,
        damping: d,
        n_inputs,
    } = *params;
    if nm == 0 {
        return Err(MorError::InvalidParameter("n_masses must be positive".into()));
    }
    if n_inputs == 0 || n_inputs > nm {
        return Err(MorError::InvalidParameter(format!(
            "n_inputs must be in 1..={nm}, got {n_inputs}"
        )));
    }
    for (v, name) in [(m, "mass"), (k, "stiffness"), (d, "damping")] {
        if !(v.is_finite() && v > 0.0) {
            return Err(MorError::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }

    let n = 2 * nm;
    let mut a = Mat::zeros(n, n);
    for i in 0..nm {
        let (q, p) = (2 * i, 2 * i + 1);
        a[(q, p)] = 1.0 / m;
        a[(p, p)] = -d / m;
        // Ground spring plus one spring per neighbour.
        let neighbours = usize::from(i > 0) + usize::from(i + 1 < nm);
        a[(p, q)] = -k * (1 + neighbours) as f64;
        if i > 0 {
            a[(p, q - 2)] = k;
        }
        if i + 1 < nm {
            a[(p, q + 2)] = k;
        }
    }
    let mut b = Mat::zeros(n, n_inputs);
    for i in 0..n_inputs {
        b[(2 * i + 1, i)] = 1.0;
    }
    let mut c = Mat::zeros(1, n);
    c[(0, 1)] = 1.0;
    StateSpaceModel::new(a, b, c)
}
