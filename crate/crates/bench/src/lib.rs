//! Fixtures shared by the benchmarks.

use splitmor_core::{build_msd, unit_vector_basis, InitialConditionBasis, MsdParams, StateSpaceModel};

/// Mass-spring-damper chain with the initial-condition space spanned by its last state.
pub fn msd_with_last_state(masses: usize) -> (StateSpaceModel, InitialConditionBasis) {
    let m = build_msd(&MsdParams::with_masses(masses)).expect("valid chain");
    let n = 2 * masses;
    let basis = unit_vector_basis(n, &[n]).expect("index in range");
    (m, basis)
}
