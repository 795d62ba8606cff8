//! Local well-posedness machinery: the constant schedule, the Duhamel
//! recurrence, Picard iteration with its contraction ledger, a split-step
//! oracle and the continuous-dependence experiment.

mod continuity;
mod data;
mod estimate;
mod linear;
mod oracle;
mod picard;
mod schedule;
mod spacetime;

pub use continuity::{continuity_experiment, ContinuityReport, CONTINUITY_SLACK};
pub use data::{CauchyData, DataSpec, ModeSpec};
pub use estimate::{energy_estimate, random_forcing, EnergyEstimate};
pub use linear::{duhamel_step, solve_free, solve_linear};
pub use oracle::{cfl_step, energy_drift, energy_functional, free_oracle, leapfrog_oracle};
pub use picard::{
    picard_solve, picard_solve_strict, ContractionLedger, LedgerEntry, PicardOptions,
    PicardOutcome, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE, DIVERGENCE_STREAK,
};
pub use schedule::{
    forcing_budget, make_schedule, IterationSchedule, ScheduleChecks, DEFAULT_BILINEAR_CONSTANT,
};
pub use spacetime::SpaceTimeField;
