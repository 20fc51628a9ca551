//! Episode execution over a plan: deterministic per-episode runs,
//! chunked in-order log writes (byte-identical output at any
//! parallelism), and resume by skipping already-logged jobs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use crate::agents::{run_agent, run_oracle, AgentError, Trajectory};
use crate::chaos::{build_ablation_profile, build_profile, FaultSession, ProfileError};
use crate::core::config::RunConfig;
use crate::core::cost::{compute_cost, CostError};
use crate::core::log::{read_episode_log, LogError, LogWriter};
use crate::core::seed::{episode_rng, SeedStream};
use crate::core::types::{EpisodeRecord, TaskSpec, SCHEMA_VERSION};
use crate::domains::{verify, VerifierError};
use crate::metamorph::perturb_task;
use crate::runner::plan::{EpisodeJob, ExperimentPlan};
use crate::runner::stub::StubPolicyClient;

/// Jobs executed concurrently between log flushes. The log is written
/// in plan order within each chunk, so output bytes are independent of
/// worker count; resume granularity is the individual record.
const CHUNK_SIZE: usize = 32;

/// Abort threshold: more than this fraction of errored jobs stops the
/// run instead of producing a misleadingly sparse log.
const MAX_ERRORED_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("unknown task id {0:?} in plan")]
    UnknownTask(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("{errored} of {total} jobs errored, above the {:.0}% abort threshold", MAX_ERRORED_FRACTION * 100.0)]
    TooManyErrors { errored: usize, total: usize },
}

/// Outcome of an execution pass.
#[derive(Debug)]
pub struct ExecutionReport {
    /// Records produced by this pass, in plan order.
    pub records: Vec<EpisodeRecord>,
    /// Jobs skipped because the log already contained them.
    pub skipped: usize,
    /// Transport-errored jobs with their diagnostics. These are not
    /// failures: they never enter pass-rate denominators.
    pub errored: Vec<(EpisodeJob, String)>,
}

/// Runs one episode job to a finished record. Pure given (job, task,
/// config): every run with the same inputs yields the same record.
pub fn run_episode(
    job: &EpisodeJob,
    task: &TaskSpec,
    config: &RunConfig,
) -> Result<EpisodeRecord, ExecError> {
    let mut perturb_rng = episode_rng(job.perturb_seed, SeedStream::Perturbation);
    let (task_p, applied_mrs) = perturb_task(task, job.epsilon, &mut perturb_rng)
        .expect("validated config supplies supported epsilon levels");

    let profile = match job.fault_profile {
        Some(name) => build_ablation_profile(name),
        None => build_profile(job.lambda_level)?,
    };
    let mut session = FaultSession::new(profile, &task_p.initial_state);
    let mut fault_rng = episode_rng(job.seed, SeedStream::Faults);

    let trajectory: Trajectory = if job.agent_id == "oracle" {
        run_oracle(&task_p, &mut session, &mut fault_rng)
    } else {
        let mut client = StubPolicyClient::new(&task_p);
        run_agent(
            &job.agent_id,
            &task_p,
            &mut session,
            &mut client,
            config.max_turns_per_episode,
            config.temperature.unwrap_or(0.0),
            job.seed,
            &mut fault_rng,
        )?
    };

    let success = verify(&task_p, &task_p.initial_state, &trajectory.final_state)?;
    let cost_usd = compute_cost(
        trajectory.tokens_in,
        trajectory.tokens_out,
        &config.model_id,
        &config.price_table,
    )?;
    // Simulated wall clock: injected latency plus a fixed per-turn and
    // per-call allowance, kept deterministic so logs are reproducible.
    let wall_ms = trajectory.simulated_latency_ms
        + 120 * trajectory.turns_used as u64
        + 15 * trajectory.tool_calls.len() as u64;

    let record = EpisodeRecord {
        schema_version: SCHEMA_VERSION,
        task_id: job.task_id.clone(),
        epsilon: job.epsilon,
        lambda_level: job.lambda_level,
        fault_profile: job.fault_profile.map(|p| p.as_str().to_string()),
        trial_index: job.trial_index,
        agent_id: job.agent_id.clone(),
        model_id: config.model_id.clone(),
        seed: job.seed,
        perturbed_description: task_p.description.clone(),
        applied_mrs,
        transcript: trajectory.transcript,
        tool_calls: trajectory.tool_calls,
        fault_events: trajectory.fault_events,
        success,
        final_state: trajectory.final_state,
        tokens_in: trajectory.tokens_in,
        tokens_out: trajectory.tokens_out,
        wall_ms,
        cost_usd,
    };
    debug_assert!(record.validate().is_ok());
    Ok(record)
}

#[cfg(feature = "parallel")]
fn run_chunk(
    chunk: &[&EpisodeJob],
    tasks: &BTreeMap<String, TaskSpec>,
    config: &RunConfig,
) -> Vec<Result<EpisodeRecord, ExecError>> {
    use rayon::prelude::*;
    chunk
        .par_iter()
        .map(|job| {
            let task = tasks
                .get(&job.task_id)
                .ok_or_else(|| ExecError::UnknownTask(job.task_id.clone()))?;
            run_episode(job, task, config)
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_chunk(
    chunk: &[&EpisodeJob],
    tasks: &BTreeMap<String, TaskSpec>,
    config: &RunConfig,
) -> Vec<Result<EpisodeRecord, ExecError>> {
    chunk
        .iter()
        .map(|job| {
            let task = tasks
                .get(&job.task_id)
                .ok_or_else(|| ExecError::UnknownTask(job.task_id.clone()))?;
            run_episode(job, task, config)
        })
        .collect()
}

/// Executes the plan against the log at `out_path`, resuming past any
/// records already present. Workers run per chunk; results are written
/// back in plan order so the final log bytes are parallelism-invariant.
pub fn execute_plan(
    plan: &ExperimentPlan,
    config: &RunConfig,
    tasks: &[TaskSpec],
    out_path: &Path,
) -> Result<ExecutionReport, ExecError> {
    let task_map: BTreeMap<String, TaskSpec> = tasks
        .iter()
        .map(|t| (t.task_id.clone(), t.clone()))
        .collect();

    let done: BTreeSet<_> = if out_path.exists() {
        read_episode_log(out_path)?
            .iter()
            .map(record_key)
            .collect()
    } else {
        BTreeSet::new()
    };
    let pending: Vec<&EpisodeJob> = plan
        .jobs
        .iter()
        .filter(|j| !done.contains(&j.key()))
        .collect();
    let skipped = plan.jobs.len() - pending.len();

    let mut writer = LogWriter::append(out_path)?;
    let mut records = Vec::new();
    let mut errored = Vec::new();
    for chunk in pending.chunks(CHUNK_SIZE) {
        for (job, result) in chunk.iter().zip(run_chunk(chunk, &task_map, config)) {
            match result {
                Ok(record) => {
                    writer.write(&record)?;
                    records.push(record);
                }
                Err(e) => errored.push(((*job).clone(), e.to_string())),
            }
        }
        writer.flush()?;
        if errored.len() as f64 > plan.jobs.len() as f64 * MAX_ERRORED_FRACTION {
            return Err(ExecError::TooManyErrors {
                errored: errored.len(),
                total: plan.jobs.len(),
            });
        }
    }
    Ok(ExecutionReport {
        records,
        skipped,
        errored,
    })
}

/// Mirror of `EpisodeJob::key` over a logged record.
pub fn record_key(
    r: &EpisodeRecord,
) -> (
    String,
    u32,
    u32,
    Option<crate::core::config::AblationName>,
    String,
    u32,
) {
    let profile = r.fault_profile.as_deref().and_then(|name| {
        crate::core::config::AblationName::ALL
            .into_iter()
            .find(|p| p.as_str() == name)
    });
    (
        r.task_id.clone(),
        (r.epsilon * 1000.0).round() as u32,
        (r.lambda_level * 1000.0).round() as u32,
        profile,
        r.agent_id.clone(),
        r.trial_index,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::all_task_suites;
    use crate::runner::plan::plan_experiment;
    use tempfile::tempdir;

    fn small_config() -> RunConfig {
        let mut c = RunConfig::paper_main();
        c.epsilon_levels = vec![0.0, 0.2];
        c.lambda_levels = vec![0.0, 0.2];
        c
    }

    #[test]
    fn oracle_full_grid_at_lambda_zero_is_all_success() {
        let mut config = small_config();
        config.agent_ids = vec!["oracle".to_string()];
        config.lambda_levels = vec![0.0];
        config.epsilon_levels = vec![0.0, 0.1, 0.2, 0.3];
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(&config, &tasks).unwrap();
        let dir = tempdir().unwrap();
        let out = dir.path().join("log.jsonl");
        let report = execute_plan(&plan, &config, &tasks, &out).unwrap();
        assert_eq!(report.records.len(), plan.jobs.len());
        assert!(report.errored.is_empty());
        assert!(report.records.iter().all(|r| r.success));
    }

    #[test]
    fn rerun_is_fully_resumed() {
        let mut config = small_config();
        config.epsilon_levels = vec![0.0];
        config.agent_ids = vec!["react".to_string()];
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(&config, &tasks).unwrap();
        let dir = tempdir().unwrap();
        let out = dir.path().join("log.jsonl");
        let first = execute_plan(&plan, &config, &tasks, &out).unwrap();
        assert_eq!(first.skipped, 0);
        let second = execute_plan(&plan, &config, &tasks, &out).unwrap();
        assert_eq!(second.skipped, plan.jobs.len());
        assert!(second.records.is_empty());
        let log = read_episode_log(&out).unwrap();
        assert_eq!(log.len(), plan.jobs.len(), "no duplicates appended");
    }

    #[test]
    fn interrupted_run_resumes_without_duplicates() {
        let mut config = small_config();
        config.epsilon_levels = vec![0.0];
        config.agent_ids = vec!["react".to_string()];
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(&config, &tasks).unwrap();
        let dir = tempdir().unwrap();

        // Full reference run.
        let full_path = dir.path().join("full.jsonl");
        execute_plan(&plan, &config, &tasks, &full_path).unwrap();
        let full = std::fs::read(&full_path).unwrap();

        // Simulated interrupt: execute a truncated plan, then resume
        // with the full one against the same log.
        let cut = plan.jobs.len() / 2;
        let partial = ExperimentPlan {
            jobs: plan.jobs[..cut].to_vec(),
        };
        let resumed_path = dir.path().join("resumed.jsonl");
        execute_plan(&partial, &config, &tasks, &resumed_path).unwrap();
        let report = execute_plan(&plan, &config, &tasks, &resumed_path).unwrap();
        assert_eq!(report.skipped, cut);
        assert_eq!(report.records.len(), plan.jobs.len() - cut);
        assert_eq!(std::fs::read(&resumed_path).unwrap(), full);
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let config = small_config();
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(&config, &tasks).unwrap();
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        execute_plan(&plan, &config, &tasks, &a).unwrap();
        execute_plan(&plan, &config, &tasks, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn trials_of_a_grid_point_share_perturbed_text() {
        let mut config = small_config();
        config.agent_ids = vec!["react".to_string()];
        config.lambda_levels = vec![0.0];
        config.epsilon_levels = vec![0.2];
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(&config, &tasks).unwrap();
        let dir = tempdir().unwrap();
        let out = dir.path().join("log.jsonl");
        let report = execute_plan(&plan, &config, &tasks, &out).unwrap();
        for pair in report.records.chunks(2) {
            assert_eq!(pair[0].task_id, pair[1].task_id);
            assert_eq!(
                pair[0].perturbed_description,
                pair[1].perturbed_description
            );
        }
    }

    #[test]
    fn ablation_records_carry_profile_names() {
        let mut config = RunConfig::paper_ablation();
        config.agent_ids = vec!["react".to_string()];
        let tasks = all_task_suites(config.global_seed);
        let plan = plan_experiment(&config, &tasks).unwrap();
        let dir = tempdir().unwrap();
        let out = dir.path().join("log.jsonl");
        let report = execute_plan(&plan, &config, &tasks, &out).unwrap();
        let profiles: BTreeSet<_> = report
            .records
            .iter()
            .filter_map(|r| r.fault_profile.clone())
            .collect();
        assert_eq!(profiles.len(), 4);
        assert_eq!(report.records.len(), 160);
    }
}
