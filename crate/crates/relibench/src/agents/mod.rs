//! Agent architectures (ReAct, Reflexion), the scripted oracle, and
//! the chat-model client boundary.

pub mod client;
#[cfg(feature = "live")]
pub mod http;
pub mod oracle;
pub mod prompts;
pub mod react;
pub mod reflexion;

use thiserror::Error;

use crate::core::types::{FaultEvent, ToolCallRecord, Turn};
use crate::domains::state::DomainState;

pub use client::{
    ClientError, ModelAction, ModelClient, ModelRequest, ModelResponse, RetryingClient,
    ScriptedClient,
};
pub use oracle::run_oracle;
pub use react::run_react;
pub use reflexion::run_reflexion;

/// Default model-turn budget per episode.
pub const DEFAULT_MAX_TURNS: u32 = 20;
/// Default reflection budget for Reflexion.
pub const DEFAULT_MAX_REFLECTIONS: u32 = 2;

/// Agent ids accepted in run configs.
pub const KNOWN_AGENTS: [&str; 2] = ["react", "reflexion"];

#[derive(Debug, Error)]
pub enum AgentError {
    /// Model transport failed even after client retries; the episode
    /// is errored, which is distinct from task failure.
    #[error("model transport failed: {0}")]
    Transport(#[from] ClientError),
    #[error("unknown agent id {0:?}")]
    UnknownAgent(String),
}

/// Everything one agent run produced.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub transcript: Vec<Turn>,
    pub tool_calls: Vec<ToolCallRecord>,
    pub fault_events: Vec<FaultEvent>,
    pub final_state: DomainState,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub turns_used: u32,
    /// The agent reached finish() rather than hitting a budget cap.
    pub finished: bool,
    pub simulated_latency_ms: u64,
}

/// Dispatches to the architecture named by `agent_id`.
#[allow(clippy::too_many_arguments)]
pub fn run_agent(
    agent_id: &str,
    task: &crate::core::types::TaskSpec,
    session: &mut crate::chaos::FaultSession,
    model_client: &mut dyn ModelClient,
    max_turns: u32,
    temperature: f64,
    seed_hint: u64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Trajectory, AgentError> {
    match agent_id {
        "react" => run_react(task, session, model_client, max_turns, temperature, seed_hint, rng),
        "reflexion" => run_reflexion(
            task,
            session,
            model_client,
            max_turns,
            DEFAULT_MAX_REFLECTIONS,
            temperature,
            seed_hint,
            rng,
        ),
        other => Err(AgentError::UnknownAgent(other.to_string())),
    }
}
