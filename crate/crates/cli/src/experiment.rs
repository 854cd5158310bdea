//! End-to-end comparison of augmented BT and the split method on one model.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use splitmor_core::bounds::{abt_bound, split_bound, E2Source};
use splitmor_core::gramians::{gramian_factors, hankel_spectrum, GramianFactors};
use splitmor_core::mtx::{load_model, read_matrix};
use splitmor_core::reduction::augmented_input;
use splitmor_core::simulation::{calibrate_initial_state, default_horizon, l2_quadrature_error, RelativeErrors};
use splitmor_core::{
    abt_reduce, build_msd, coordinates_of, l2_norm, linf_norm, online_phase, relative_errors, simulate,
    split_reduce, unit_vector_basis, AbtOptions, InitialConditionBasis, InputSignal, Mat, MorError, MsdParams,
    OrderSelection, Realization, SimulationTrace, StateSpaceModel, TimeGrid, Vector, X0Method,
};

use crate::config::{BasisSpec, ExperimentConfig, InputSpec, MethodName, ModelSource};
use crate::report::{
    BoundReport, HorizonSummary, IrkaReport, MethodReport, MethodTimings, ModelSummary, Orders, ReductionReport,
    ReferenceSummary, Spectra, Timings,
};

/// Everything the methods share: model, basis, input, grid and the full response.
pub struct Setup {
    pub model: StateSpaceModel,
    pub basis: InitialConditionBasis,
    pub input: InputSignal,
    pub grid: TimeGrid,
    pub x0: Vector,
    pub z0: Vector,
    pub u_l2: f64,
}

pub fn load(cfg: &ExperimentConfig) -> Result<(StateSpaceModel, Option<InitialConditionBasis>)> {
    match &cfg.model {
        ModelSource::Msd {
            masses,
            mass,
            stiffness,
            damping,
            inputs,
        } => {
            let params = MsdParams {
                n_masses: *masses,
                mass: *mass,
                stiffness: *stiffness,
                damping: *damping,
                n_inputs: *inputs,
            };
            Ok((build_msd(&params)?, None))
        }
        ModelSource::Path { dir, outputs } => {
            let (m, basis) = load_model(dir).with_context(|| format!("loading model from {}", dir.display()))?;
            let Some(rows) = outputs else {
                return Ok((m, basis));
            };
            let mut c = Mat::zeros(rows.len(), m.order());
            for (k, &i) in rows.iter().enumerate() {
                if i == 0 || i > m.outputs() {
                    bail!("model.outputs: output {i} out of range 1..={}", m.outputs());
                }
                c.set_row(k, &m.c().row(i - 1));
            }
            Ok((StateSpaceModel::new(m.a().clone(), m.b().clone(), c)?, basis))
        }
    }
}

pub fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    cfg.validate()?;
    let (model, stored) = load(cfg)?;
    let n = model.order();
    let basis = match &cfg.basis {
        BasisSpec::Last => unit_vector_basis(n, &[n])?,
        BasisSpec::Unit { indices } => unit_vector_basis(n, indices).context("basis.indices")?,
        BasisSpec::File { path } => InitialConditionBasis::new(read_matrix(path)?).context("basis.path")?,
        BasisSpec::Model => stored.context("basis: the model directory has no X0.mtx")?,
    };
    let input = match &cfg.input {
        InputSpec::Zero => InputSignal::zero(model.inputs()),
        InputSpec::Decaying {
            amplitude,
            decay,
            omega,
            phase,
        } => InputSignal::DecayingSinusoid {
            amplitude: Vector::from_element(model.inputs(), *amplitude),
            decay: *decay,
            omega: *omega,
            phase: *phase,
        },
    };
    let decay = match &cfg.input {
        InputSpec::Decaying { decay, .. } => Some(*decay),
        InputSpec::Zero => None,
    };
    let (t_f, dt) = default_horizon(&model, decay);
    let t_f = cfg.horizon.t_final.unwrap_or(t_f);
    let dt = cfg.horizon.dt.unwrap_or(if cfg.horizon.t_final.is_some() { t_f / 4000.0 } else { dt });
    let grid = TimeGrid::new(t_f, dt)?;

    let z = match &cfg.initial_state.coordinates {
        Some(z) if z.len() != basis.n0() => bail!(
            "initial_state.coordinates: {} values for a basis with {} columns",
            z.len(),
            basis.n0()
        ),
        Some(z) => Vector::from_column_slice(z),
        None => Vector::from_element(basis.n0(), 1.0),
    };
    let mut x0 = basis.matrix() * &z;
    if cfg.initial_state.calibrate && basis.n0() > 0 {
        x0 = calibrate_initial_state(&model, &input, &x0, grid.t_f(), grid.dt)?;
    }
    let z0 = coordinates_of(&x0, &basis)?;
    let u_l2 = input.energy(&grid);
    Ok(Setup {
        model,
        basis,
        input,
        grid,
        x0,
        z0,
        u_l2,
    })
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

fn selection(order: Option<usize>, tol: f64) -> OrderSelection {
    order.map_or(OrderSelection::Tolerance(tol), OrderSelection::Fixed)
}

fn spectra(s: &Setup) -> Result<(Spectra, f64, f64)> {
    let n0 = s.basis.n0();
    let mut factors: Vec<(usize, GramianFactors)> = Vec::new();
    let (res, t_gram) = timed(|| -> Result<()> {
        factors.push((0, gramian_factors(&s.model)?));
        if n0 > 0 {
            let sx0y = s.model.with_input(s.basis.matrix().clone())?;
            factors.push((1, gramian_factors(&sx0y)?));
        }
        let (aug, _) = augmented_input(&s.model, &s.basis, AbtOptions::default().scaling)?;
        factors.push((2, gramian_factors(&aug)?));
        Ok(())
    });
    res?;
    let (out, t_svd) = timed(|| {
        let mut out = Spectra::default();
        for (k, f) in &factors {
            let sigma = hankel_spectrum(f).sigma;
            match k {
                0 => out.sigma = sigma,
                1 => out.theta = sigma,
                _ => out.eta = sigma,
            }
        }
        out
    });
    Ok((out, t_gram, t_svd))
}

struct MethodRun {
    report: MethodReport,
    timings: MethodTimings,
    trace: SimulationTrace,
}

fn rel(full: &SimulationTrace, tr: &SimulationTrace) -> Result<Option<RelativeErrors>> {
    match relative_errors(full, tr) {
        Ok(e) => Ok(Some(e)),
        Err(MorError::DegenerateReference) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn run_method(cfg: &ExperimentConfig, s: &Setup, full: &SimulationTrace, method: MethodName) -> Result<MethodRun> {
    let tol = cfg.orders.tol;
    let (t_f, dt) = (s.grid.t_f(), s.grid.dt);
    let z0_norm = s.z0.norm();
    let mut warnings = Vec::new();
    let (orders, trace, bound, irka, timings) = match method {
        MethodName::Augbt => {
            let (red, offline) = timed(|| {
                abt_reduce(
                    &s.model,
                    &s.basis,
                    selection(cfg.orders.order_aug, tol),
                    AbtOptions::default(),
                )
            });
            let red = red?;
            let xr = red.x0.as_ref().map_or_else(|| Vector::zeros(red.order()), |x| x * &s.z0);
            let (trace, online) = timed(|| simulate(&red, &s.input, &xr, t_f, dt));
            let (b, t_bound) = timed(|| abt_bound(&s.model, &red, &s.basis, s.u_l2, z0_norm));
            let b = b?;
            warnings.extend(red.warnings.iter().map(ToString::to_string));
            let orders = Orders {
                r_aug: Some(red.order()),
                total: red.order(),
                ..Orders::default()
            };
            let bound = BoundReport {
                value: b.total(),
                input_term: Some(b.input_term),
                initial_term: Some(b.initial_term),
                ..BoundReport::default()
            };
            (orders, trace?, bound, None, MethodTimings { offline, online, bound: t_bound })
        }
        MethodName::BtBt | MethodName::BtIrka => {
            let x0_method = if method == MethodName::BtBt {
                X0Method::Bt
            } else {
                X0Method::Irka(cfg.irka_options())
            };
            let (split, offline) = timed(|| {
                split_reduce(
                    &s.model,
                    &s.basis,
                    selection(cfg.orders.order_u, tol),
                    selection(cfg.orders.order_x0, tol),
                    x0_method,
                )
            });
            let split = split?;
            let (trace, online) = timed(|| online_phase(&split, &s.input, &s.x0, t_f, dt));
            let (b, t_bound) = timed(|| split_bound(&split, s.u_l2, z0_norm));
            let (value, budget) = b?;
            warnings.extend(split.suy.warnings.iter().map(ToString::to_string));
            warnings.extend(split.sxy.warnings.iter().map(ToString::to_string));
            warnings.extend(budget.warnings.iter().map(ToString::to_string));
            let irka = split.sxy.irka.as_ref().filter(|_| method == MethodName::BtIrka).map(|i| IrkaReport {
                iterations: i.iterations,
                converged: i.converged,
                shift_change: i.shift_change,
                hermite_residual: i.residuals.max(),
                reflected: i.reflected,
            });
            let (r_u, r_x0) = (split.suy.order(), split.sxy.order());
            let orders = Orders {
                r_u: Some(r_u),
                r_x0: Some(r_x0),
                total: r_u + r_x0,
                ..Orders::default()
            };
            let bound = BoundReport {
                value,
                e1: Some(budget.e1),
                e2: Some(budget.e2),
                e2_source: Some(
                    match budget.e2_source {
                        E2Source::HankelTrace => "hankel-trace",
                        E2Source::H2Error => "h2-error",
                    }
                    .into(),
                ),
                ..BoundReport::default()
            };
            (orders, trace?, bound, irka, MethodTimings { offline, online, bound: t_bound })
        }
    };
    let diff = full.difference(&trace)?;
    let (abs_l2, abs_linf) = (l2_norm(&diff), linf_norm(&diff));
    let errors = rel(full, &trace)?;
    // Allowance for the trapezoidal L2 norm and for round-off in exact reductions.
    let l2_quadrature = l2_quadrature_error(&diff);
    let bound_holds = abs_l2 <= bound.value + l2_quadrature + 1e-10 * l2_norm(full);
    if !bound_holds {
        log::error!(
            "{method}: measured error {abs_l2:.6e} exceeds the bound {:.6e}",
            bound.value
        );
    }
    Ok(MethodRun {
        report: MethodReport {
            method,
            orders,
            rel_l2: errors.map(|e| e.rel_l2),
            rel_linf: errors.map(|e| e.rel_linf),
            abs_l2,
            abs_linf,
            l2_quadrature,
            bound,
            bound_holds,
            irka,
            warnings,
        },
        timings,
        trace,
    })
}

/// Builds the model, simulates it, reduces it with every configured method and
/// compares each reduced response with the full one.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ReductionReport> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let (full, t_ref) = timed(|| simulate(&s.model, &s.input, &s.x0, s.grid.t_f(), s.grid.dt));
    let full = full.context("full-order simulation")?;
    let (spectra, t_gram, t_svd) = spectra(&s)?;

    let run = |m: &MethodName| run_method(cfg, &s, &full, *m).with_context(|| format!("method {m}"));
    let runs: Vec<MethodRun> = if cfg.parallel {
        cfg.methods.par_iter().map(run).collect::<Result<_>>()?
    } else {
        cfg.methods.iter().map(run).collect::<Result<_>>()?
    };

    let mut timings = Timings {
        reference_simulation: t_ref,
        gramians: t_gram,
        svd: t_svd,
        methods: BTreeMap::new(),
        total: 0.0,
    };
    let mut methods = Vec::new();
    let mut traces = vec![("full".to_string(), full.clone())];
    for r in runs {
        timings.methods.insert(r.report.method.to_string(), r.timings);
        traces.push((r.report.method.to_string(), r.trace));
        methods.push(r.report);
    }
    let bound_violations = methods.iter().filter(|r| !r.bound_holds).map(|r| r.method).collect();
    timings.total = start.elapsed().as_secs_f64();
    Ok(ReductionReport {
        config: cfg.clone(),
        model: ModelSummary {
            order: s.model.order(),
            inputs: s.model.inputs(),
            outputs: s.model.outputs(),
            n0: s.basis.n0(),
        },
        horizon: HorizonSummary {
            t_final: s.grid.t_f(),
            dt: s.grid.dt,
            steps: s.grid.steps,
        },
        reference: ReferenceSummary {
            y_l2: l2_norm(&full),
            y_linf: linf_norm(&full),
            u_l2: s.u_l2,
            z0: s.z0.iter().copied().collect(),
            z0_norm: s.z0.norm(),
        },
        spectra,
        methods,
        bound_violations,
        timings,
        traces,
    })
}
