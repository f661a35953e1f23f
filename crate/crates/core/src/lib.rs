//! Impulsive feedback-adaptive control of ODE trajectories onto invariant
//! manifolds.
//!
//! A system exposes a semi-invariant `I` with `dI/dt = L(x) I`; its zero set
//! is the target surface. Impulses rescale `||I||` (or, for parallel control,
//! the complementary coordinates) so that the accumulated exponents drive
//! the trajectory onto the surface.

pub mod controllers;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod semi_invariant;
pub mod stability;
pub mod systems;

pub use controllers::{
    check_guarantees, run_impulsive, Control, GuaranteeReport, ImpulseMap, ImpulseSchedule, RunOptions, RunStatus,
    TrajectoryRecord, Verdict,
};
pub use dynamics::{integrate_segment, rk4_step, FnField, StateVector, VectorField};
pub use error::{Error, Result};
pub use semi_invariant::{decompose, eval_h, Decomposition, ImpulseRecord, SemiInvariant};
pub use stability::{estimate_ds, ds_constant_matrix, DsSettings, OnSurfaceSystem, StabilityEstimate};
pub use systems::PresetName;
