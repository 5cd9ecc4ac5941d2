//! Lindblad master equations, steady states and quantum-jump trajectories.

pub mod integrate;
mod lindblad;
mod mcwf;
mod model;
mod ops;
mod steady;

pub use integrate::Tolerances;
pub use lindblad::{evolve_operator, lindblad_evolve, EvolveOptions, Evolution};
pub(crate) use lindblad::trace_product;
pub use mcwf::{
    mcwf_trajectory, trajectory_ensemble, EnsembleResult, JumpEvent, TrajectoryOptions,
    TrajectoryRecord, TrajectorySolver,
};
pub use model::{make_model, Channel, DissipationParams, LindbladModel, Variant};
pub use steady::{steady_state, SteadyMethod, SteadyOptions, SteadyState};
