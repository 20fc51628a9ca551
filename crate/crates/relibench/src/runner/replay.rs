//! Log replay: recomputes each episode's final state and verdict from
//! the recorded tool calls alone. Explicit-fault calls left the world
//! untouched, so replay skips them and re-applies the rest against the
//! task's initial state.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::core::types::{EpisodeRecord, TaskSpec};
use crate::domains::state::DomainState;
use crate::domains::{apply_tool, verify, ToolError, VerifierError};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("record for unknown task id {0:?}")]
    UnknownTask(String),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub success: bool,
    pub verdict_matches: bool,
    pub state_matches: bool,
}

/// Replays one record against its task definition.
pub fn replay_record(task: &TaskSpec, record: &EpisodeRecord) -> Result<ReplayOutcome, ReplayError> {
    let mut state: DomainState = task.initial_state.clone();
    for call in &record.tool_calls {
        if call.is_explicit_fault {
            continue;
        }
        let (next, _text) = apply_tool(&state, &call.tool_name, &call.args)?;
        state = next;
    }
    let success = verify(task, &task.initial_state, &state)?;
    Ok(ReplayOutcome {
        success,
        verdict_matches: success == record.success,
        state_matches: state == record.final_state,
    })
}

/// One replay disagreement.
#[derive(Debug, Clone)]
pub struct ReplayMismatch {
    pub task_id: String,
    pub seed: u64,
    pub detail: String,
}

/// Replays a whole log; returns every record whose recomputed verdict
/// or final state disagrees with what was logged.
pub fn replay_log(
    records: &[EpisodeRecord],
    tasks: &[TaskSpec],
) -> Result<Vec<ReplayMismatch>, ReplayError> {
    let by_id: BTreeMap<&str, &TaskSpec> =
        tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    let mut mismatches = Vec::new();
    for record in records {
        let task = by_id
            .get(record.task_id.as_str())
            .ok_or_else(|| ReplayError::UnknownTask(record.task_id.clone()))?;
        let outcome = replay_record(task, record)?;
        if !outcome.verdict_matches || !outcome.state_matches {
            mismatches.push(ReplayMismatch {
                task_id: record.task_id.clone(),
                seed: record.seed,
                detail: format!(
                    "verdict_matches={} state_matches={} (logged success={}, replayed={})",
                    outcome.verdict_matches,
                    outcome.state_matches,
                    record.success,
                    outcome.success
                ),
            });
        }
    }
    Ok(mismatches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::config::RunConfig;
    use crate::domains::all_task_suites;
    use crate::runner::execute::execute_plan;
    use crate::runner::plan::plan_experiment;
    use tempfile::tempdir;

    fn run_small(config: &RunConfig) -> (Vec<EpisodeRecord>, Vec<TaskSpec>) {
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(config, &tasks).unwrap();
        let dir = tempdir().unwrap();
        let out = dir.path().join("log.jsonl");
        let report = execute_plan(&plan, config, &tasks, &out).unwrap();
        (report.records, tasks)
    }

    #[test]
    fn replay_matches_clean_run() {
        let mut config = RunConfig::paper_main();
        config.lambda_levels = vec![0.0];
        config.epsilon_levels = vec![0.0, 0.2];
        let (records, tasks) = run_small(&config);
        let mismatches = replay_log(&records, &tasks).unwrap();
        assert!(mismatches.is_empty(), "{mismatches:?}");
    }

    #[test]
    fn replay_matches_faulted_run() {
        let mut config = RunConfig::paper_main();
        config.lambda_levels = vec![0.3];
        config.epsilon_levels = vec![0.0, 0.2];
        let (records, tasks) = run_small(&config);
        assert!(
            records.iter().any(|r| !r.fault_events.is_empty()),
            "heavy profile should inject faults somewhere"
        );
        let mismatches = replay_log(&records, &tasks).unwrap();
        assert!(mismatches.is_empty(), "{mismatches:?}");
    }

    #[test]
    fn tampered_verdict_is_caught() {
        let mut config = RunConfig::paper_main();
        config.lambda_levels = vec![0.0];
        config.epsilon_levels = vec![0.0];
        config.agent_ids = vec!["react".to_string()];
        let (mut records, tasks) = run_small(&config);
        records[0].success = !records[0].success;
        let mismatches = replay_log(&records, &tasks).unwrap();
        assert_eq!(mismatches.len(), 1);
        assert_eq!(mismatches[0].task_id, records[0].task_id);
    }
}
