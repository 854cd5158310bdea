//! Experiment runner for the split reduction method: configuration, execution
//! and report files.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{ExperimentConfig, MethodName};
pub use experiment::run_experiment;
pub use report::{emit_report, ReductionReport};

use config::{BasisSpec, ModelSource};
use splitmor_core::MsdParams;

/// The two mass-spring-damper scenarios run by `mor bench msd`: the initial
/// condition on the last state (`case1`) and on state 30 (`case2`).
pub fn msd_cases(masses: usize) -> Vec<(&'static str, ExperimentConfig)> {
    let n = 2 * masses;
    [("case1", n), ("case2", 30.min(n))]
        .into_iter()
        .map(|(name, idx)| {
            let mut cfg = ExperimentConfig::new(ModelSource::msd(&MsdParams::with_masses(masses)));
            cfg.basis = BasisSpec::Unit { indices: vec![idx] };
            (name, cfg)
        })
        .collect()
}
