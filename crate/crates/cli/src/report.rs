//! Experiment results and the files written from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use splitmor_core::simulation::{to_csv, SimulationTrace};

use crate::config::{ExperimentConfig, MethodName};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub order: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub n0: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    pub t_final: f64,
    pub dt: f64,
    pub steps: usize,
}

/// Norms of the full-order response and of the data entering the bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub y_l2: f64,
    pub y_linf: f64,
    pub u_l2: f64,
    pub z0: Vec<f64>,
    pub z0_norm: f64,
}

/// Hankel singular values of `(A, B, C)`, `(A, X₀, C)` and `(A, [B s·X₀], C)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Spectra {
    pub sigma: Vec<f64>,
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Orders {
    pub r_u: Option<usize>,
    pub r_x0: Option<usize>,
    pub r_aug: Option<usize>,
    /// Total number of reduced states simulated.
    pub total: usize,
}

/// Evaluated a priori bound on `‖y − ỹ‖_{L2}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundReport {
    pub value: f64,
    pub e1: Option<f64>,
    pub e2: Option<f64>,
    pub e2_source: Option<String>,
    pub input_term: Option<f64>,
    pub initial_term: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrkaReport {
    pub iterations: usize,
    pub converged: bool,
    pub shift_change: f64,
    pub hermite_residual: f64,
    pub reflected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: MethodName,
    pub orders: Orders,
    /// `None` when the full response vanishes.
    pub rel_l2: Option<f64>,
    pub rel_linf: Option<f64>,
    pub abs_l2: f64,
    pub abs_linf: f64,
    /// Estimated quadrature error of `abs_l2`.
    pub l2_quadrature: f64,
    pub bound: BoundReport,
    /// `abs_l2 ≤ bound + l2_quadrature + 1e-10·‖y‖_{L2}`.
    pub bound_holds: bool,
    pub irka: Option<IrkaReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MethodTimings {
    pub offline: f64,
    pub online: f64,
    pub bound: f64,
}

/// Wall-clock seconds per phase; the only non-deterministic part of a report.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub reference_simulation: f64,
    pub gramians: f64,
    pub svd: f64,
    pub methods: BTreeMap<String, MethodTimings>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub config: ExperimentConfig,
    pub model: ModelSummary,
    pub horizon: HorizonSummary,
    pub reference: ReferenceSummary,
    pub spectra: Spectra,
    pub methods: Vec<MethodReport>,
    pub bound_violations: Vec<MethodName>,
    pub timings: Timings,
    /// Full-order trace followed by one trace per method.
    #[serde(skip)]
    pub traces: Vec<(String, SimulationTrace)>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.bound_violations.is_empty()
    }

    pub fn method(&self, m: MethodName) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m)
    }

    pub fn trace(&self, name: &str) -> Option<&SimulationTrace> {
        self.traces.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes `report.json`, `summary.txt`, `hsv.csv`, `trace_<name>.csv` and
/// `error_<method>.csv` into `dir`, creating it if needed.
pub fn emit_report(rep: &ReductionReport, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> anyhow::Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
        Ok(())
    };
    put("report.json".into(), rep.to_json() + "\n")?;
    put("summary.txt".into(), summary(rep))?;
    put("hsv.csv".into(), hsv_csv(&rep.spectra))?;
    let full = rep.trace("full");
    for (name, tr) in &rep.traces {
        put(format!("trace_{name}.csv"), to_csv(tr))?;
        if let (Some(full), true) = (full, name != "full") {
            let diff = full.difference(tr)?;
            put(format!("error_{name}.csv"), to_csv(&diff))?;
        }
    }
    Ok(written)
}

/// `index,sigma,theta,eta`, blank where a spectrum is shorter.
pub fn hsv_csv(s: &Spectra) -> String {
    let rows = s.sigma.len().max(s.theta.len()).max(s.eta.len());
    let mut out = String::from("index,sigma,theta,eta\n");
    let cell = |v: &[f64], i: usize| v.get(i).map(|x| format!("{x:e}")).unwrap_or_default();
    for i in 0..rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            cell(&s.sigma, i),
            cell(&s.theta, i),
            cell(&s.eta, i)
        );
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into())
}

/// Plain-text table: one column per method, rows for the relative L∞ and L2 errors,
/// followed by orders and bounds.
pub fn summary(rep: &ReductionReport) -> String {
    let mut out = String::new();
    let m = &rep.model;
    let _ = writeln!(
        out,
        "model: n={} m={} p={} n0={}  horizon T={:.4} dt={:.4e}",
        m.order, m.inputs, m.outputs, m.n0, rep.horizon.t_final, rep.horizon.dt
    );
    let _ = writeln!(out);
    let _ = write!(out, "{:<16}", "");
    for r in &rep.methods {
        let _ = write!(out, "{:>14}", r.method.as_str());
    }
    let _ = writeln!(out);
    for (label, get) in [
        ("L_inf error:", (|r: &MethodReport| r.rel_linf) as fn(&MethodReport) -> Option<f64>),
        ("L_2 error:", |r: &MethodReport| r.rel_l2),
    ] {
        let _ = write!(out, "{label:<16}");
        for r in &rep.methods {
            let _ = write!(out, "{:>14}", fmt_opt(get(r)));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out);
    for r in &rep.methods {
        let o = &r.orders;
        let orders = match (o.r_u, o.r_x0, o.r_aug) {
            (_, _, Some(a)) => format!("r_aug={a}"),
            (Some(u), Some(x), _) => format!("r_u={u} r_x0={x}"),
            _ => format!("r={}", o.total),
        };
        let verdict = if r.bound_holds { "ok" } else { "VIOLATED" };
        let _ = writeln!(
            out,
            "{:<8} {:<18} |y-y~|_L2={:.4e} <= bound {:.4e} [{verdict}]",
            r.method.as_str(),
            orders,
            r.abs_l2,
            r.bound.value
        );
    }
    out
}
