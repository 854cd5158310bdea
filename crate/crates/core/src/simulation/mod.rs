//! Time-domain simulation on uniform grids with first-order-hold inputs.

mod norms;
mod propagate;

pub use norms::{l2_norm, l2_quadrature_error, linf_norm, relative_errors, tail_warning, to_csv, write_csv, RelativeErrors};
pub use propagate::{calibrate_initial_state, default_horizon, online_phase, simulate, superpose};

use std::fmt;

use crate::error::{MorError, Result};
use crate::linalg::{Mat, Vector};

/// Uniform grid `0, Δt, …, N·Δt = T_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// Grid with `round(T_f/Δt)` steps; `Δt` is adjusted so the last sample lands on `T_f`.
    pub fn new(t_f: f64, dt: f64) -> Result<Self> {
        if !(t_f.is_finite() && dt.is_finite() && t_f > 0.0 && dt > 0.0) {
            return Err(MorError::InvalidParameter(format!(
                "horizon and step must be positive, got T_f={t_f}, dt={dt}"
            )));
        }
        let steps = (t_f / dt).round().max(1.0) as usize;
        Ok(Self {
            dt: t_f / steps as f64,
            steps,
        })
    }

    pub fn t_f(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        self.dt * k as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }
}

/// Input `u(t)`; continuous kinds are linearly interpolated between grid samples.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSignal {
    Zero { inputs: usize },
    /// `Σ_k a_k δ(t − t_k)`: column `k` of `amplitudes` fires at `times[k]`.
    ImpulseTrain { amplitudes: Mat, times: Vec<f64> },
    /// `u_j(t) = a_j e^{−λt} cos(ωt + φ)`.
    DecayingSinusoid {
        amplitude: Vector,
        decay: f64,
        omega: f64,
        phase: f64,
    },
    /// Samples `values[:, k]` at `k·dt`, zero after the last sample.
    Sampled { dt: f64, values: Mat },
}

impl InputSignal {
    pub fn zero(inputs: usize) -> Self {
        InputSignal::Zero { inputs }
    }

    /// `a e^{−λt}` on every channel.
    pub fn decaying(amplitude: Vector, decay: f64) -> Self {
        InputSignal::DecayingSinusoid {
            amplitude,
            decay,
            omega: 0.0,
            phase: 0.0,
        }
    }

    pub fn inputs(&self) -> usize {
        match self {
            InputSignal::Zero { inputs } => *inputs,
            InputSignal::ImpulseTrain { amplitudes, .. } => amplitudes.nrows(),
            InputSignal::DecayingSinusoid { amplitude, .. } => amplitude.len(),
            InputSignal::Sampled { values, .. } => values.nrows(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            InputSignal::Zero { .. } => true,
            InputSignal::ImpulseTrain { amplitudes, times } => {
                amplitudes.ncols() == times.len()
                    && amplitudes.iter().all(|v| v.is_finite())
                    && times.iter().all(|t| t.is_finite() && *t >= 0.0)
            }
            InputSignal::DecayingSinusoid {
                amplitude,
                decay,
                omega,
                phase,
            } => amplitude.iter().all(|v| v.is_finite()) && *decay >= 0.0 && omega.is_finite() && phase.is_finite(),
            InputSignal::Sampled { dt, values } => *dt > 0.0 && values.iter().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(MorError::InvalidParameter(format!("malformed input signal {self}")))
        }
    }

    /// Smooth part of the input at time `t` (impulses excluded).
    pub fn sample(&self, t: f64) -> Vector {
        match self {
            InputSignal::Zero { inputs } => Vector::zeros(*inputs),
            InputSignal::ImpulseTrain { amplitudes, .. } => Vector::zeros(amplitudes.nrows()),
            InputSignal::DecayingSinusoid {
                amplitude,
                decay,
                omega,
                phase,
            } => amplitude * ((-decay * t).exp() * (omega * t + phase).cos()),
            InputSignal::Sampled { dt, values } => {
                let pos = t / dt;
                let k = pos.floor() as usize;
                if k + 1 < values.ncols() {
                    let w = pos - k as f64;
                    values.column(k) * (1.0 - w) + values.column(k + 1) * w
                } else if k + 1 == values.ncols() && pos == k as f64 {
                    values.column(k).into_owned()
                } else {
                    Vector::zeros(values.nrows())
                }
            }
        }
    }

    /// Input samples on the grid, one column per grid point.
    pub fn samples(&self, grid: &TimeGrid) -> Mat {
        let mut u = Mat::zeros(self.inputs(), grid.len());
        for (k, t) in grid.times().enumerate() {
            u.set_column(k, &self.sample(t));
        }
        u
    }

    /// Exact L2 norm on `[0, T_f]` of the piecewise-linear input that is simulated;
    /// infinite for impulse trains.
    pub fn energy(&self, grid: &TimeGrid) -> f64 {
        match self {
            InputSignal::Zero { .. } => 0.0,
            InputSignal::ImpulseTrain { amplitudes, .. } if amplitudes.iter().any(|&v| v != 0.0) => f64::INFINITY,
            InputSignal::ImpulseTrain { .. } => 0.0,
            _ => {
                let u = self.samples(grid);
                let mut acc = 0.0;
                for k in 0..grid.steps {
                    let (a, b) = (u.column(k), u.column(k + 1));
                    acc += grid.dt / 3.0 * (a.norm_squared() + a.dot(&b) + b.norm_squared());
                }
                acc.sqrt()
            }
        }
    }
}

impl fmt::Display for InputSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSignal::Zero { inputs } => write!(f, "zero({inputs})"),
            InputSignal::ImpulseTrain { times, .. } => write!(f, "impulses({} at {:?})", times.len(), times),
            InputSignal::DecayingSinusoid {
                amplitude,
                decay,
                omega,
                phase,
            } => write!(
                f,
                "decaying-sinusoid(|a|={:.3e}, decay={decay}, omega={omega}, phase={phase})",
                amplitude.norm()
            ),
            InputSignal::Sampled { dt, values } => write!(f, "sampled({}x{}, dt={dt})", values.nrows(), values.ncols()),
        }
    }
}

/// Sampled output `y` (one column per grid point), optionally split into the
/// input-driven and initial-condition-driven parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub grid: TimeGrid,
    pub y: Mat,
    pub components: Option<(Mat, Mat)>,
    pub provenance: String,
}

impl SimulationTrace {
    pub fn outputs(&self) -> usize {
        self.y.nrows()
    }

    pub fn difference(&self, other: &SimulationTrace) -> Result<SimulationTrace> {
        if self.grid != other.grid || self.y.shape() != other.y.shape() {
            return Err(MorError::GridMismatch);
        }
        Ok(SimulationTrace {
            grid: self.grid,
            y: &self.y - &other.y,
            components: None,
            provenance: format!("{} - {}", self.provenance, other.provenance),
        })
    }
}
