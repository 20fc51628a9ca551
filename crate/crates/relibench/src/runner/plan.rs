//! Experiment planning: the ordered job list for a configured grid.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::config::{AblationName, ConfigError, RunConfig};
use crate::core::seed::derive_episode_seed;
use crate::core::types::TaskSpec;

/// One episode to execute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeJob {
    pub task_id: String,
    pub epsilon: f64,
    pub lambda_level: f64,
    /// Set for ablation runs; `lambda_level` then records the shared
    /// ablation stress level.
    pub fault_profile: Option<AblationName>,
    pub agent_id: String,
    pub trial_index: u32,
    /// Episode seed driving fault draws and agent sampling.
    pub seed: u64,
    /// Seed for the perturbation stream. Trials of one grid point share
    /// it unless the config asks to re-perturb per trial.
    pub perturb_seed: u64,
}

impl EpisodeJob {
    /// Resume key: the coordinates that identify this job in a log.
    pub fn key(&self) -> (String, u32, u32, Option<AblationName>, String, u32) {
        (
            self.task_id.clone(),
            (self.epsilon * 1000.0).round() as u32,
            (self.lambda_level * 1000.0).round() as u32,
            self.fault_profile,
            self.agent_id.clone(),
            self.trial_index,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub jobs: Vec<EpisodeJob>,
}

#[derive(Debug, Error)]
pub enum PlanningError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no tasks supplied")]
    NoTasks,
    #[error("unknown agent id {0:?}")]
    UnknownAgent(String),
}

/// Seed derivation needs coordinates distinct across ablation
/// profiles, which share (ε, λ); the profile is folded into the agent
/// component of the hash.
fn agent_seed_key(agent_id: &str, profile: Option<AblationName>) -> String {
    match profile {
        Some(p) => format!("{agent_id}@{p}"),
        None => agent_id.to_string(),
    }
}

/// Expands the config into the full ordered cross product: task-major,
/// then stress level, then ε, then agent, trial innermost. The order
/// is fixed so resume bookkeeping and logs are stable.
pub fn plan_experiment(
    config: &RunConfig,
    tasks: &[TaskSpec],
) -> Result<ExperimentPlan, PlanningError> {
    config.validate()?;
    if tasks.is_empty() {
        return Err(PlanningError::NoTasks);
    }
    for agent in &config.agent_ids {
        if !crate::agents::KNOWN_AGENTS.contains(&agent.as_str()) && agent != "oracle" {
            return Err(PlanningError::UnknownAgent(agent.clone()));
        }
    }
    // Main runs sweep λ levels; ablation runs substitute the four
    // profiles at the configured (single) λ level.
    let stress_axis: Vec<(f64, Option<AblationName>)> = if config.ablation_profile.is_some() {
        let lambda = config.lambda_levels[0];
        AblationName::ALL.iter().map(|&p| (lambda, Some(p))).collect()
    } else {
        config.lambda_levels.iter().map(|&l| (l, None)).collect()
    };

    let mut jobs = Vec::with_capacity(config.expected_episode_count(tasks.len()));
    for task in tasks {
        for &(lambda, profile) in &stress_axis {
            for &epsilon in &config.epsilon_levels {
                for agent_id in &config.agent_ids {
                    let key = agent_seed_key(agent_id, profile);
                    for trial_index in 0..config.k_trials {
                        let seed = derive_episode_seed(
                            config.global_seed,
                            &task.task_id,
                            epsilon,
                            lambda,
                            &key,
                            trial_index,
                        );
                        let perturb_trial =
                            if config.reperturb_per_trial { trial_index } else { 0 };
                        // Perturbation is agent- and profile-blind so
                        // every agent sees the same perturbed text.
                        let perturb_seed = derive_episode_seed(
                            config.global_seed,
                            &task.task_id,
                            epsilon,
                            lambda,
                            "perturbation",
                            perturb_trial,
                        );
                        jobs.push(EpisodeJob {
                            task_id: task.task_id.clone(),
                            epsilon,
                            lambda_level: lambda,
                            fault_profile: profile,
                            agent_id: agent_id.clone(),
                            trial_index,
                            seed,
                            perturb_seed,
                        });
                    }
                }
            }
        }
    }
    debug_assert_eq!(jobs.len(), config.expected_episode_count(tasks.len()));
    debug_assert_eq!(
        jobs.iter().map(|j| j.seed).collect::<BTreeSet<_>>().len(),
        jobs.len(),
        "episode seeds must be pairwise distinct"
    );
    Ok(ExperimentPlan { jobs })
}
