use super::{l2_norm, InputSignal, SimulationTrace, TimeGrid};
use crate::error::{MorError, Result, Warning};
use crate::linalg::{matrix_exponential, norm2_estimate, Mat, Vector};
use crate::model::{coordinates_of, Realization, StateSpaceModel};
use crate::reduction::SplitReducedModel;

/// Exact step map for piecewise-linear inputs:
/// `x_{k+1} = Φ x_k + F₀ u_k + F₁ u_{k+1}`.
struct FohStep {
    phi: Mat,
    f0: Mat,
    f1: Mat,
    substeps: usize,
}

impl FohStep {
    fn new(a: &Mat, b: &Mat, dt: f64) -> Result<Self> {
        let (n, m) = (a.nrows(), b.ncols());
        let substeps = ((norm2_estimate(a) * dt) / 0.5).ceil().max(1.0) as usize;
        let h = dt / substeps as f64;
        // exp of [[A, B, 0], [0, 0, I/Δt], [0, 0, 0]] over Δt: the input ramps from 0 to 1
        // through the third block, so the (1,3) block is the weight of u_{k+1}.
        let mut aug = Mat::zeros(n + 2 * m, n + 2 * m);
        aug.view_mut((0, 0), (n, n)).copy_from(a);
        aug.view_mut((0, n), (n, m)).copy_from(b);
        for i in 0..m {
            aug[(n + i, n + m + i)] = 1.0 / dt;
        }
        let mut e = matrix_exponential(&aug, h)?;
        let single = e.clone();
        for _ in 1..substeps {
            e = &e * &single;
        }
        let phi = e.view((0, 0), (n, n)).into_owned();
        let gamma0 = e.view((0, n), (n, m)).into_owned();
        let gamma2 = e.view((0, n + m), (n, m)).into_owned();
        Ok(Self {
            phi,
            f0: gamma0 - &gamma2,
            f1: gamma2,
            substeps,
        })
    }
}

/// Simulates `ẋ = Ax + Bu`, `y = Cx`, `x(0) = x0` on `[0, T_f]`.
///
/// Impulses are applied as exact state jumps `x ← x + B a` at their grid
/// times; the sample at an impulse time is taken just after the jump.
pub fn simulate(
    model: &dyn Realization,
    u: &InputSignal,
    x0: &Vector,
    t_f: f64,
    dt: f64,
) -> Result<SimulationTrace> {
    let grid = TimeGrid::new(t_f, dt)?;
    simulate_on(model, u, x0, &grid).map(|(tr, _)| tr)
}

pub(crate) fn simulate_on(
    model: &dyn Realization,
    u: &InputSignal,
    x0: &Vector,
    grid: &TimeGrid,
) -> Result<(SimulationTrace, Vec<Warning>)> {
    let (n, m) = (model.order(), model.inputs());
    u.validate()?;
    if u.inputs() != m {
        return Err(MorError::DimensionMismatch(format!(
            "input has {} channels, model has {}",
            u.inputs(),
            m
        )));
    }
    if x0.len() != n {
        return Err(MorError::DimensionMismatch(format!(
            "initial state has length {}, model has order {}",
            x0.len(),
            n
        )));
    }
    let mut warnings = Vec::new();
    let step = FohStep::new(model.a(), model.b(), grid.dt)?;
    if step.substeps > 1 {
        log::debug!("time step split into {} substeps", step.substeps);
        warnings.push(Warning::StepTooLarge {
            substeps: step.substeps,
        });
    }

    let mut jumps: Vec<(usize, Vector)> = Vec::new();
    if let InputSignal::ImpulseTrain { amplitudes, times } = u {
        for (j, &t) in times.iter().enumerate() {
            let k = (t / grid.dt).round() as usize;
            if (k as f64 * grid.dt - t).abs() > 1e-9 * grid.dt.max(t) {
                return Err(MorError::InvalidParameter(format!(
                    "impulse time {t} is not on the simulation grid"
                )));
            }
            if k <= grid.steps {
                jumps.push((k, model.b() * amplitudes.column(j)));
            }
        }
    }
    let apply_jumps = |k: usize, x: &mut Vector| {
        for (kk, dx) in &jumps {
            if *kk == k {
                *x += dx;
            }
        }
    };

    let samples = u.samples(grid);
    let mut y = Mat::zeros(model.outputs(), grid.len());
    let mut x = x0.clone();
    apply_jumps(0, &mut x);
    y.set_column(0, &(model.c() * &x));
    let mut next = Vector::zeros(n);
    let smooth = !matches!(u, InputSignal::Zero { .. } | InputSignal::ImpulseTrain { .. });
    for k in 0..grid.steps {
        next.gemv(1.0, &step.phi, &x, 0.0);
        if smooth {
            next.gemv(1.0, &step.f0, &samples.column(k), 1.0);
            next.gemv(1.0, &step.f1, &samples.column(k + 1), 1.0);
        }
        std::mem::swap(&mut x, &mut next);
        apply_jumps(k + 1, &mut x);
        y.set_column(k + 1, &(model.c() * &x));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(MorError::NonFinite("simulation"));
    }
    let trace = SimulationTrace {
        grid: *grid,
        y,
        components: None,
        provenance: format!("order {n}, input {u}, |x0|={:.6e}", x0.norm()),
    };
    Ok((trace, warnings))
}

/// Pointwise sum of two traces; the summands are kept as components.
pub fn superpose(yu: &SimulationTrace, yx0: &SimulationTrace) -> Result<SimulationTrace> {
    if yu.grid != yx0.grid || yu.y.shape() != yx0.y.shape() {
        return Err(MorError::GridMismatch);
    }
    Ok(SimulationTrace {
        grid: yu.grid,
        y: &yu.y + &yx0.y,
        components: Some((yu.y.clone(), yx0.y.clone())),
        provenance: format!("({}) + ({})", yu.provenance, yx0.provenance),
    })
}

/// Online phase of the split method: both reduced maps simulated and superposed.
///
/// The initial-condition map sees `z₀ δ(t)`, realized as the reduced initial state `B̃ₓ z₀`.
pub fn online_phase(
    s: &SplitReducedModel,
    u: &InputSignal,
    x0: &Vector,
    t_f: f64,
    dt: f64,
) -> Result<SimulationTrace> {
    let z0 = coordinates_of(x0, &s.basis)?;
    let grid = TimeGrid::new(t_f, dt)?;
    let (yu, _) = simulate_on(&s.suy, u, &Vector::zeros(s.suy.order()), &grid)?;
    let xr0 = &s.sxy.b * &z0;
    let (yx, _) = simulate_on(&s.sxy, &InputSignal::zero(s.basis.n0()), &xr0, &grid)?;
    superpose(&yu, &yx)
}

/// Horizon over which `‖e^{A T_f}‖` drops to about `1e-8`, also covering an
/// input that decays at rate `input_decay`; `Δt = T_f/4000`.
pub fn default_horizon(m: &StateSpaceModel, input_decay: Option<f64>) -> (f64, f64) {
    let mut rate = -m.schur().spectral_abscissa();
    if let Some(d) = input_decay.filter(|d| *d > 0.0) {
        rate = rate.min(d);
    }
    let t_f = 1e8f64.ln() / rate;
    (t_f, t_f / 4000.0)
}

/// Rescales `x0` so that the zero-input response has the same L2 norm as the
/// zero-state response to `u`. Returns `x0` unchanged if either response vanishes.
pub fn calibrate_initial_state(
    m: &StateSpaceModel,
    u: &InputSignal,
    x0: &Vector,
    t_f: f64,
    dt: f64,
) -> Result<Vector> {
    let yu = simulate(m, u, &Vector::zeros(m.order()), t_f, dt)?;
    let yx = simulate(m, &InputSignal::zero(m.inputs()), x0, t_f, dt)?;
    let (nu, nx) = (l2_norm(&yu), l2_norm(&yx));
    if nu > 0.0 && nx > 0.0 {
        Ok(x0 * (nu / nx))
    } else {
        Ok(x0.clone())
    }
}
