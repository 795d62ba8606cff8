//! Batch driver: JSON run configurations, dispatch to the experiments,
//! canonical reports with measured values and thresholds, and replay.

mod config;
mod replay;
mod report;
mod run;

pub use config::{
    Command, ConstantParams, ContinuityParams, Experiment, KernelParams, RunConfig, ScheduleParams, SearchParams,
    SimulateParams, MAX_SAMPLES, MAX_TRIALS,
};
pub use replay::{replay, ReplayOptions, ReplayReport, ScalarMismatch, REPLAY_FILE, REPLAY_TOLERANCE};
pub use report::{versions, Check, Recorder, Relation, RunReport, REPORT_FILE, REPORT_FORMAT, REPORT_FORMAT_VERSION};
pub use run::{
    run, BUDGET_SLACK, CONTRACTION_LIMIT, HAND_VALUE_TOLERANCE, ORACLE_FACTOR, RATIO_FLOOR, REFERENCE_RESIDUAL,
};
