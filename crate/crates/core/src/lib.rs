//! Model-order reduction for LTI systems with nonzero initial conditions.
//!
//! The input-to-output map `(A, B, C)` and the initial-condition-to-output map
//! `(A, X₀, C)` can be reduced independently (balanced truncation or IRKA) and
//! recombined by superposition, next to classical and augmented balanced
//! truncation. Error bounds, a first-order-hold simulator and benchmark
//! generators are included.

pub mod bounds;
pub mod error;
pub mod gramians;
pub mod linalg;
pub mod model;
pub mod msd;
pub mod mtx;
pub mod reduction;
pub mod simulation;

pub use error::{MorError, Result, Warning};
pub use linalg::{Mat, Vector};
pub use model::{
    coordinates_of, unit_vector_basis, validate_model, InitialCondition, InitialConditionBasis, Realization,
    StateSpaceModel,
};
pub use msd::{build_msd, MsdParams};
pub use reduction::{
    abt_reduce, bt_reduce, h2_error_norm, irka_reduce, order_from_tolerance, split_reduce, AbtOptions, IrkaOptions,
    Method, OrderSelection, ReducedModel, SplitReducedModel, X0Method,
};
pub use simulation::{
    l2_norm, linf_norm, online_phase, relative_errors, simulate, superpose, InputSignal, SimulationTrace, TimeGrid,
};
