//! JSON experiment configuration.
//!
//! Every field except `model` has a default, so `{"model": {"kind": "msd"}}`
//! is a complete configuration:
//!
//! ```json
//! {
//!   "model": {"kind": "msd", "masses": 150, "mass": 1.0, "stiffness": 2.0, "damping": 0.1, "inputs": 10},
//!   "basis": {"kind": "last"},
//!   "initial_state": {"coordinates": null, "calibrate": true},
//!   "orders": {"tol": 0.01, "order_u": null, "order_x0": null, "order_aug": null},
//!   "input": {"kind": "decaying", "amplitude": 1.0, "decay": 0.05, "omega": 0.0, "phase": 0.0},
//!   "horizon": {"t_final": null, "dt": null},
//!   "methods": ["augbt", "bt-bt", "bt-irka"],
//!   "irka": {"max_iters": 100, "shift_tol": 1e-6, "starts": 3},
//!   "seed": 0,
//!   "output": null,
//!   "parallel": false
//! }
//! ```

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use splitmor_core::{IrkaOptions, MsdParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    #[serde(default)]
    pub basis: BasisSpec,
    #[serde(default)]
    pub initial_state: InitialStateSpec,
    #[serde(default)]
    pub orders: OrderSpec,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub horizon: HorizonSpec,
    #[serde(default = "all_methods")]
    pub methods: Vec<MethodName>,
    #[serde(default)]
    pub irka: IrkaSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Augbt,
    BtBt,
    BtIrka,
}

impl MethodName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodName::Augbt => "augbt",
            MethodName::BtBt => "bt-bt",
            MethodName::BtIrka => "bt-irka",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "augbt" => Some(MethodName::Augbt),
            "bt-bt" => Some(MethodName::BtBt),
            "bt-irka" => Some(MethodName::BtIrka),
            _ => None,
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn all_methods() -> Vec<MethodName> {
    vec![MethodName::Augbt, MethodName::BtBt, MethodName::BtIrka]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSource {
    /// Built-in mass-spring-damper chain.
    Msd {
        #[serde(default = "defaults::masses")]
        masses: usize,
        #[serde(default = "defaults::mass")]
        mass: f64,
        #[serde(default = "defaults::stiffness")]
        stiffness: f64,
        #[serde(default = "defaults::damping")]
        damping: f64,
        #[serde(default = "defaults::inputs")]
        inputs: usize,
    },
    /// Directory holding `A.mtx`, `B.mtx`, `C.mtx` and optionally `X0.mtx`.
    Path {
        dir: PathBuf,
        /// Keep only these outputs (1-based), e.g. `[1]`.
        #[serde(default)]
        outputs: Option<Vec<usize>>,
    },
}

impl ModelSource {
    pub fn msd(params: &MsdParams) -> Self {
        ModelSource::Msd {
            masses: params.n_masses,
            mass: params.mass,
            stiffness: params.stiffness,
            damping: params.damping,
            inputs: params.n_inputs,
        }
    }
}

mod defaults {
    use splitmor_core::MsdParams;

    pub fn masses() -> usize {
        MsdParams::default().n_masses
    }
    pub fn mass() -> f64 {
        MsdParams::default().mass
    }
    pub fn stiffness() -> f64 {
        MsdParams::default().stiffness
    }
    pub fn damping() -> f64 {
        MsdParams::default().damping
    }
    pub fn inputs() -> usize {
        MsdParams::default().n_inputs
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn decay() -> f64 {
        0.05
    }
    pub fn yes() -> bool {
        true
    }
}

/// Columns of `X₀`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BasisSpec {
    /// The last unit vector `e_n`.
    #[default]
    Last,
    /// Unit vectors `e_i`, 1-based; an empty list gives `n₀ = 0`.
    Unit { indices: Vec<usize> },
    /// A Matrix Market file.
    File { path: PathBuf },
    /// `X0.mtx` next to a model loaded from a directory.
    Model,
}

/// `x₀ = X₀ z₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    /// `z₀`; all ones when absent.
    #[serde(default)]
    pub coordinates: Option<Vec<f64>>,
    /// Rescale `x₀` so its free response carries the same L2 energy as the forced response.
    #[serde(default = "defaults::yes")]
    pub calibrate: bool,
}

impl Default for InitialStateSpec {
    fn default() -> Self {
        Self {
            coordinates: None,
            calibrate: true,
        }
    }
}

/// Fixed orders take precedence over the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderSpec {
    #[serde(default = "OrderSpec::default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub order_u: Option<usize>,
    #[serde(default)]
    pub order_x0: Option<usize>,
    #[serde(default)]
    pub order_aug: Option<usize>,
}

impl OrderSpec {
    fn default_tol() -> f64 {
        1e-2
    }
}

impl Default for OrderSpec {
    fn default() -> Self {
        Self {
            tol: Self::default_tol(),
            order_u: None,
            order_x0: None,
            order_aug: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    Zero,
    /// `u_j(t) = a e^{−λt} cos(ωt + φ)` on every channel.
    Decaying {
        #[serde(default = "defaults::one")]
        amplitude: f64,
        #[serde(default = "defaults::decay")]
        decay: f64,
        #[serde(default)]
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec::Decaying {
            amplitude: 1.0,
            decay: defaults::decay(),
            omega: 0.0,
            phase: 0.0,
        }
    }
}

/// Simulation horizon; derived from the slowest decay rate when absent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    #[serde(default)]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrkaSpec {
    pub max_iters: usize,
    pub shift_tol: f64,
    pub starts: usize,
}

impl Default for IrkaSpec {
    fn default() -> Self {
        let d = IrkaOptions::default();
        Self {
            max_iters: d.max_iters,
            shift_tol: d.shift_tol,
            starts: d.starts,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config error at `{path}`: {message}")]
    Field { path: String, message: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    fn field(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Field {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

impl ExperimentConfig {
    /// A configuration with every default and the given model.
    pub fn new(model: ModelSource) -> Self {
        Self {
            model,
            basis: BasisSpec::default(),
            initial_state: InitialStateSpec::default(),
            orders: OrderSpec::default(),
            input: InputSpec::default(),
            horizon: HorizonSpec::default(),
            methods: all_methods(),
            irka: IrkaSpec::default(),
            seed: 0,
            output: None,
            parallel: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::field(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.methods.is_empty() {
            return Err(ConfigError::field("methods", "at least one method is required"));
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return Err(ConfigError::field("methods", "methods must not repeat"));
        }
        if let ModelSource::Msd {
            masses,
            mass,
            stiffness,
            damping,
            inputs,
        } = &self.model
        {
            if *masses == 0 || *inputs == 0 || inputs > masses {
                return Err(ConfigError::field(
                    "model",
                    "need masses > 0 and 0 < inputs <= masses",
                ));
            }
            for (name, v) in [("model.mass", mass), ("model.stiffness", stiffness), ("model.damping", damping)] {
                if !(v.is_finite() && *v > 0.0) {
                    return Err(ConfigError::field(name, format!("must be positive, got {v}")));
                }
            }
        }
        if let (BasisSpec::Model, ModelSource::Msd { .. }) = (&self.basis, &self.model) {
            return Err(ConfigError::field("basis", "`model` basis needs a model directory"));
        }
        if !(self.orders.tol > 0.0 && self.orders.tol < 1.0) {
            return Err(ConfigError::field(
                "orders.tol",
                format!("must lie in (0, 1), got {}", self.orders.tol),
            ));
        }
        if let InputSpec::Decaying {
            amplitude,
            decay,
            omega,
            phase,
        } = &self.input
        {
            if !(amplitude.is_finite() && omega.is_finite() && phase.is_finite()) {
                return Err(ConfigError::field("input", "values must be finite"));
            }
            if !(decay.is_finite() && *decay >= 0.0) {
                return Err(ConfigError::field("input.decay", "must be non-negative"));
            }
        }
        for (name, v) in [("horizon.t_final", self.horizon.t_final), ("horizon.dt", self.horizon.dt)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(ConfigError::field(name, format!("must be positive, got {v}")));
                }
            }
        }
        if let Some(z) = &self.initial_state.coordinates {
            if z.iter().any(|v| !v.is_finite()) {
                return Err(ConfigError::field("initial_state.coordinates", "values must be finite"));
            }
        }
        if self.irka.max_iters == 0 || self.irka.starts == 0 || self.irka.shift_tol.is_nan() || self.irka.shift_tol <= 0.0 {
            return Err(ConfigError::field(
                "irka",
                "need max_iters > 0, starts > 0 and shift_tol > 0",
            ));
        }
        Ok(())
    }

    pub fn irka_options(&self) -> IrkaOptions {
        IrkaOptions {
            max_iters: self.irka.max_iters,
            shift_tol: self.irka.shift_tol,
            seed: self.seed,
            starts: self.irka.starts,
        }
    }
}
