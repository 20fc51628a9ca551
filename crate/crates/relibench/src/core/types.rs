//! Core record types shared by every other module.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domains::state::DomainState;

/// Version stamp written into every persisted episode record.
pub const SCHEMA_VERSION: u32 = 1;

/// The four simulated tool domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Scheduling,
    Travel,
    Support,
    Ecommerce,
}

impl Domain {
    pub const ALL: [Domain; 4] = [
        Domain::Scheduling,
        Domain::Travel,
        Domain::Support,
        Domain::Ecommerce,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Domain::Scheduling => "scheduling",
            Domain::Travel => "travel",
            Domain::Support => "support",
            Domain::Ecommerce => "ecommerce",
        }
    }
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Task complexity level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Complexity {
    L1,
    L2,
}

/// Structured record of the semantic goal of a task: the entities
/// (dates, times, names, flight ids, SKUs, coupon codes) an oracle
/// agent needs and a perturbation must preserve.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GoalMeta(pub BTreeMap<String, String>);

impl GoalMeta {
    pub fn new() -> Self {
        GoalMeta(BTreeMap::new())
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.0.insert(key.to_string(), value.into());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(|s| s.as_str())
    }

    /// Entity values that must stay recoverable from the description.
    /// Keys prefixed with `_` are oracle hints, not surface entities.
    pub fn entities(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0
            .iter()
            .filter(|(k, _)| !k.starts_with('_'))
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// One task: description, initial state, tool set, and verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub domain: Domain,
    pub description: String,
    pub complexity: Complexity,
    pub initial_state: DomainState,
    pub tool_set: Vec<String>,
    pub verifier_id: String,
    pub verifier_params: BTreeMap<String, String>,
    pub goal_meta: GoalMeta,
}

/// Tool-call argument map. Values are scalars or lists, mirroring the
/// wire format the model emits.
pub type ToolArgs = BTreeMap<String, serde_json::Value>;

/// One executed tool call inside an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCallRecord {
    pub index: u32,
    pub tool_name: String,
    pub args: ToolArgs,
    pub result_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault_annotation: Option<String>,
    pub is_explicit_fault: bool,
}

/// One injected fault and whether the agent later recovered from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub tool_call_index: u32,
    pub fault_id: String,
    pub was_explicit: bool,
    pub recovered: bool,
}

/// A metamorphic relation applied to the episode's task description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedMr {
    pub mr_id: String,
    pub weight: f64,
}

/// One transcript turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: String,
    pub content: String,
}

impl Turn {
    pub fn new(role: &str, content: impl Into<String>) -> Self {
        Turn {
            role: role.to_string(),
            content: content.into(),
        }
    }
}

/// One agent run at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeRecord {
    pub schema_version: u32,
    pub task_id: String,
    pub epsilon: f64,
    pub lambda_level: f64,
    /// Ablation profile name when the episode ran under an ablation
    /// profile rather than a plain lambda preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault_profile: Option<String>,
    pub trial_index: u32,
    pub agent_id: String,
    pub model_id: String,
    pub seed: u64,
    pub perturbed_description: String,
    pub applied_mrs: Vec<AppliedMr>,
    pub transcript: Vec<Turn>,
    pub tool_calls: Vec<ToolCallRecord>,
    pub fault_events: Vec<FaultEvent>,
    pub success: bool,
    pub final_state: DomainState,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub wall_ms: u64,
    pub cost_usd: f64,
}

impl EpisodeRecord {
    /// Structural invariant check used on log read and before write.
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(format!("epsilon {} out of [0,1]", self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.lambda_level) {
            return Err(format!("lambda_level {} out of [0,1]", self.lambda_level));
        }
        if self.cost_usd < 0.0 {
            return Err("cost_usd negative".to_string());
        }
        for ev in &self.fault_events {
            if ev.tool_call_index as usize >= self.tool_calls.len() {
                return Err(format!(
                    "fault event references tool call {} but only {} recorded",
                    ev.tool_call_index,
                    self.tool_calls.len()
                ));
            }
        }
        for tc in &self.tool_calls {
            if tc.is_explicit_fault && tc.fault_annotation.is_none() {
                return Err(format!(
                    "tool call {} marked explicit fault without annotation",
                    tc.index
                ));
            }
        }
        let weight_sum: f64 = self.applied_mrs.iter().map(|m| m.weight).sum();
        if (weight_sum - self.epsilon).abs() > 1e-9 {
            return Err(format!(
                "applied MR weights sum {} != epsilon {}",
                weight_sum, self.epsilon
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_record() -> EpisodeRecord {
        EpisodeRecord {
            schema_version: SCHEMA_VERSION,
            task_id: "t".into(),
            epsilon: 0.0,
            lambda_level: 0.0,
            fault_profile: None,
            trial_index: 0,
            agent_id: "react".into(),
            model_id: "stub".into(),
            seed: 1,
            perturbed_description: "d".into(),
            applied_mrs: vec![],
            transcript: vec![],
            tool_calls: vec![],
            fault_events: vec![],
            success: false,
            final_state: DomainState::empty(Domain::Scheduling),
            tokens_in: 0,
            tokens_out: 0,
            wall_ms: 0,
            cost_usd: 0.0,
        }
    }

    #[test]
    fn validate_accepts_minimal() {
        assert!(minimal_record().validate().is_ok());
    }

    #[test]
    fn validate_rejects_dangling_fault_event() {
        let mut r = minimal_record();
        r.fault_events.push(FaultEvent {
            tool_call_index: 3,
            fault_id: "TransientTimeout".into(),
            was_explicit: true,
            recovered: false,
        });
        assert!(r.validate().is_err());
    }

    #[test]
    fn validate_rejects_weight_mismatch() {
        let mut r = minimal_record();
        r.applied_mrs.push(AppliedMr {
            mr_id: "Synonym".into(),
            weight: 0.05,
        });
        assert!(r.validate().is_err());
        r.epsilon = 0.05;
        assert!(r.validate().is_ok());
    }
}
