//! Experiment orchestration: grid planning, parallel episode
//! execution with resumable logs, the offline stub model policy, and
//! log replay.

pub mod execute;
pub mod plan;
pub mod replay;
pub mod stub;

pub use execute::{execute_plan, run_episode, ExecError, ExecutionReport};
pub use plan::{plan_experiment, EpisodeJob, ExperimentPlan, PlanningError};
pub use replay::{replay_log, replay_record, ReplayError, ReplayMismatch, ReplayOutcome};
pub use stub::StubPolicyClient;
