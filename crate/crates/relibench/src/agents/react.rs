//! The ReAct loop: interleaved model actions and fault-injected tool
//! execution with in-band observations.

use rand_chacha::ChaCha8Rng;

use crate::agents::client::{ModelAction, ModelClient, ModelRequest};
use crate::agents::prompts::react_system;
use crate::agents::{AgentError, Trajectory};
use crate::chaos::FaultSession;
use crate::core::types::{FaultEvent, TaskSpec, ToolArgs, ToolCallRecord, Turn};
use crate::domains::state::DomainState;
use crate::domains::tools::catalog;

/// Mutable episode state threaded through one or more loop segments
/// (Reflexion reuses it across reflection segments).
pub(crate) struct LoopState {
    pub state: DomainState,
    pub transcript: Vec<Turn>,
    pub tool_calls: Vec<ToolCallRecord>,
    pub fault_events: Vec<FaultEvent>,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub turns_used: u32,
    pub finished: bool,
    pub finish_text: String,
}

impl LoopState {
    pub fn start(task: &TaskSpec) -> Self {
        LoopState {
            state: task.initial_state.clone(),
            transcript: vec![Turn::new("user", task.description.clone())],
            tool_calls: Vec::new(),
            fault_events: Vec::new(),
            tokens_in: 0,
            tokens_out: 0,
            turns_used: 0,
            finished: false,
            finish_text: String::new(),
        }
    }

    pub fn into_trajectory(mut self, session: &FaultSession) -> Trajectory {
        mark_recovered(&self.tool_calls, &mut self.fault_events);
        Trajectory {
            transcript: self.transcript,
            tool_calls: self.tool_calls,
            fault_events: self.fault_events,
            final_state: self.state,
            tokens_in: self.tokens_in,
            tokens_out: self.tokens_out,
            turns_used: self.turns_used,
            finished: self.finished,
            simulated_latency_ms: session.simulated_latency_ms,
        }
    }
}

/// Rejects calls naming unregistered tools or carrying argument keys
/// outside the tool's signature; such calls are never executed.
fn validate_call(task: &TaskSpec, name: &str, args: &ToolArgs) -> Result<(), String> {
    if !task.tool_set.iter().any(|t| t == name) {
        return Err(format!("unknown tool '{name}'"));
    }
    let specs = catalog(task.domain);
    let Some(spec) = specs.iter().find(|t| t.name == name) else {
        return Err(format!("unknown tool '{name}'"));
    };
    for key in args.keys() {
        if !spec.params.iter().any(|p| p.name == key) {
            return Err(format!("unexpected argument '{key}' for {name}"));
        }
    }
    Ok(())
}

/// Runs model turns until finish() or the shared turn budget runs out.
pub(crate) fn run_loop(
    task: &TaskSpec,
    session: &mut FaultSession,
    client: &mut dyn ModelClient,
    ls: &mut LoopState,
    max_turns: u32,
    temperature: f64,
    seed_hint: u64,
    rng: &mut ChaCha8Rng,
) -> Result<(), AgentError> {
    let system = react_system(task.domain);
    while ls.turns_used < max_turns {
        let request = ModelRequest {
            system: system.clone(),
            messages: ls.transcript.clone(),
            tool_names: task.tool_set.clone(),
            temperature,
            seed_hint,
        };
        let response = client.send(&request)?;
        ls.turns_used += 1;
        ls.tokens_in += response.tokens_in;
        ls.tokens_out += response.tokens_out;
        ls.transcript
            .push(Turn::new("assistant", response.action.render()));
        match response.action {
            ModelAction::Finish { text } => {
                ls.finished = true;
                ls.finish_text = text;
                return Ok(());
            }
            ModelAction::ToolCall { name, args } => {
                if let Err(reason) = validate_call(task, &name, &args) {
                    ls.transcript
                        .push(Turn::new("tool", format!("invalid arguments: {reason}")));
                    session.note_turn();
                    continue;
                }
                let outcome = match session.execute(&ls.state, &name, &args, rng) {
                    Ok(o) => o,
                    Err(e) => {
                        ls.transcript
                            .push(Turn::new("tool", format!("invalid arguments: {e}")));
                        session.note_turn();
                        continue;
                    }
                };
                let index = ls.tool_calls.len() as u32;
                if let Some(fault) = outcome.fault {
                    ls.fault_events.push(FaultEvent {
                        tool_call_index: index,
                        fault_id: fault.as_str().to_string(),
                        was_explicit: fault.kind() == crate::chaos::FaultKind::ExplicitError,
                        recovered: false,
                    });
                }
                ls.tool_calls.push(ToolCallRecord {
                    index,
                    tool_name: name,
                    args,
                    result_text: outcome.result_text.clone(),
                    fault_annotation: outcome.annotation,
                    is_explicit_fault: outcome.is_explicit,
                });
                ls.state = outcome.state;
                ls.transcript.push(Turn::new("tool", outcome.result_text));
                session.note_turn();
            }
        }
    }
    Ok(())
}

/// Runs one ReAct episode against the fault-injected domain session.
pub fn run_react(
    task: &TaskSpec,
    session: &mut FaultSession,
    client: &mut dyn ModelClient,
    max_turns: u32,
    temperature: f64,
    seed_hint: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory, AgentError> {
    let mut ls = LoopState::start(task);
    run_loop(task, session, client, &mut ls, max_turns, temperature, seed_hint, rng)?;
    Ok(ls.into_trajectory(session))
}

/// Fault events whose faulted tool never later produced a clean
/// result; used by the Reflexion failure trigger.
pub(crate) fn unresolved_error_texts(ls: &LoopState) -> Vec<String> {
    let mut out = Vec::new();
    for tc in &ls.tool_calls {
        if !tc.result_text.contains("status=error") {
            continue;
        }
        let resolved = ls.tool_calls.iter().any(|later| {
            later.index > tc.index
                && later.tool_name == tc.tool_name
                && !later.result_text.contains("status=error")
        });
        if !resolved {
            out.push(format!("{}: {}", tc.tool_name, tc.result_text));
        }
    }
    out
}

/// Marks fault events recovered when a later call to the same tool
/// returned a non-faulted result.
pub(crate) fn mark_recovered(tool_calls: &[ToolCallRecord], events: &mut [FaultEvent]) {
    for ev in events.iter_mut() {
        let Some(faulted) = tool_calls.get(ev.tool_call_index as usize) else {
            continue;
        };
        ev.recovered = tool_calls.iter().any(|later| {
            later.index > ev.tool_call_index
                && later.tool_name == faulted.tool_name
                && later.fault_annotation.is_none()
        });
    }
}
