//! Reflexion: ReAct plus self-reflection segments on failure. The
//! world state is never reset between segments — reflections continue
//! in the same mutated episode, under the shared turn budget.

use rand_chacha::ChaCha8Rng;

use crate::agents::client::ModelClient;
use crate::agents::prompts::reflection_message;
use crate::agents::react::{run_loop, unresolved_error_texts, LoopState};
use crate::agents::{AgentError, Trajectory};
use crate::chaos::FaultSession;
use crate::core::types::{TaskSpec, Turn};

/// Whether the finished segment warrants a reflection: an unresolved
/// explicit tool error, or a self-declared failure in the finish text.
fn failure_trigger(ls: &LoopState) -> Option<Vec<String>> {
    let errors = unresolved_error_texts(ls);
    if !errors.is_empty() {
        return Some(errors);
    }
    let lower = ls.finish_text.to_ascii_lowercase();
    if ["fail", "cannot", "unable", "give up", "giving up"]
        .iter()
        .any(|m| lower.contains(m))
    {
        return Some(Vec::new());
    }
    None
}

/// Runs one Reflexion episode: ReAct segments separated by reflection
/// messages, at most `max_reflections` reflections, all within
/// `max_turns` model turns total.
#[allow(clippy::too_many_arguments)]
pub fn run_reflexion(
    task: &TaskSpec,
    session: &mut FaultSession,
    client: &mut dyn ModelClient,
    max_turns: u32,
    max_reflections: u32,
    temperature: f64,
    seed_hint: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory, AgentError> {
    let mut ls = LoopState::start(task);
    let mut reflections = 0;
    loop {
        run_loop(task, session, client, &mut ls, max_turns, temperature, seed_hint, rng)?;
        if !ls.finished || reflections >= max_reflections || ls.turns_used >= max_turns {
            break;
        }
        let Some(errors) = failure_trigger(&ls) else {
            break;
        };
        reflections += 1;
        ls.finished = false;
        ls.finish_text.clear();
        ls.transcript
            .push(Turn::new("assistant", reflection_message(&errors)));
    }
    Ok(ls.into_trajectory(session))
}
