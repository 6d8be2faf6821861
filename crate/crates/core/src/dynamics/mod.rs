//! Time-dependent Lindblad models and their integration.

pub mod control;
pub mod evolve;
pub mod generator;
pub mod integrator;
pub mod model;

pub use control::{drive_envelope, ComplexControl, ControlFunction, Smoothness};
pub use evolve::{
    evolve, evolve_with, propagate_matrix, PositivityCheck, Propagator, SolverOptions, TimeGrid,
    Trajectory, TrajectoryDiagnostics,
};
pub use integrator::Tolerances;
pub use model::{
    build_effective_model, build_toy_model, chirp_profile, CollapseOperator, EmitterDims,
    LindbladModel, LEAKAGE_SLOT, STORAGE_SLOT,
};
