//! Impulse schedules and maps, the impulsive runner, and runtime checks of
//! the convergence criteria.

mod guarantees;
mod maps;
mod runner;
mod schedule;

pub use guarantees::{check_guarantees, GuaranteeReport, Prop4Report, Prop5Report, Prop6Report, Verdict, LINEAR_B_TOL};
pub use maps::{GuardPolicy, ImpulseContext, ImpulseMap, PartnerConvention};
pub use runner::{
    parallel_criterion, pathwise_bound, run_impulsive, segment_betas, Control, ParallelCriterion, PathwiseBound,
    RunOptions, RunStatus, Sample, TrajectoryRecord, PATHWISE_ROUNDING,
};
pub use schedule::{ImpulseSchedule, ScheduleIter, ScheduleKind};
