//! The chat-model client boundary: request/response types, a scripted
//! stub backend, and a retrying wrapper with capped backoff.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::types::{ToolArgs, Turn};

/// One action emitted by the model: a single tool call, or finishing
/// with a final answer. Parallel tool calls are rejected upstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelAction {
    ToolCall { name: String, args: ToolArgs },
    Finish { text: String },
}

impl ModelAction {
    /// Stable single-line rendering used in transcripts.
    pub fn render(&self) -> String {
        match self {
            ModelAction::ToolCall { name, args } => format!(
                "call {name} {}",
                serde_json::to_string(args).expect("args serialize")
            ),
            ModelAction::Finish { text } => format!("finish: {text}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelRequest {
    pub system: String,
    pub messages: Vec<Turn>,
    /// Tool names the model may call; empty constrains to finish/text.
    pub tool_names: Vec<String>,
    pub temperature: f64,
    pub seed_hint: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelResponse {
    pub action: ModelAction,
    pub tokens_in: u64,
    pub tokens_out: u64,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("transient transport failure: {0}")]
    Transient(String),
    #[error("authentication failure: {0}")]
    Auth(String),
    #[error("quota exhausted: {0}")]
    Quota(String),
    #[error("permanent transport failure: {0}")]
    Permanent(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
}

/// The model backend boundary. Implementations must tolerate
/// concurrent use from many episodes when shared; the stub backends
/// here are per-episode and unshared.
pub trait ModelClient {
    fn send(&mut self, request: &ModelRequest) -> Result<ModelResponse, ClientError>;
}

/// Rough deterministic token estimate (~4 chars per token), so stub
/// runs have stable, comparable usage numbers.
pub fn estimate_tokens(text_len: usize) -> u64 {
    (text_len as u64).div_ceil(4)
}

/// Scripted backend: replays a fixed action list in order. Once the
/// script is exhausted it finishes, so episodes always terminate.
#[derive(Debug, Clone)]
pub struct ScriptedClient {
    actions: Vec<ModelAction>,
    cursor: usize,
}

impl ScriptedClient {
    pub fn new(actions: Vec<ModelAction>) -> Self {
        ScriptedClient { actions, cursor: 0 }
    }

    /// Loads a script from a JSON fixture: an array of actions tagged
    /// `{"type": "tool_call", ...}` / `{"type": "finish", ...}`.
    pub fn from_fixture(path: &std::path::Path) -> Result<Self, ClientError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClientError::Permanent(format!("read fixture: {e}")))?;
        let actions: Vec<ModelAction> = serde_json::from_str(&text)
            .map_err(|e| ClientError::Permanent(format!("parse fixture: {e}")))?;
        Ok(ScriptedClient::new(actions))
    }
}

impl ModelClient for ScriptedClient {
    fn send(&mut self, request: &ModelRequest) -> Result<ModelResponse, ClientError> {
        let mut action = self
            .actions
            .get(self.cursor)
            .cloned()
            .unwrap_or(ModelAction::Finish {
                text: "done".to_string(),
            });
        self.cursor += 1;
        // An empty catalog constrains the response to finish/text.
        if request.tool_names.is_empty() {
            if let ModelAction::ToolCall { name, .. } = &action {
                action = ModelAction::Finish {
                    text: format!("no tools offered; cannot call {name}"),
                };
            }
        }
        let in_len: usize =
            request.system.len() + request.messages.iter().map(|t| t.content.len()).sum::<usize>();
        Ok(ModelResponse {
            tokens_out: estimate_tokens(action.render().len()),
            tokens_in: estimate_tokens(in_len),
            action,
        })
    }
}

/// Wraps any client with capped-backoff retries on transient failures
/// (3 attempts per logical send). Attempt counts are recorded for
/// telemetry and tests.
pub struct RetryingClient<C> {
    inner: C,
    max_attempts: u32,
    /// Attempts used by each logical send, in order.
    pub attempts_log: Vec<u32>,
    /// Backoff schedule actually applied, in milliseconds (no real
    /// sleeping in simulation; recorded for wall-time accounting).
    pub backoff_ms: Vec<u64>,
}

impl<C: ModelClient> RetryingClient<C> {
    pub fn new(inner: C) -> Self {
        RetryingClient {
            inner,
            max_attempts: 3,
            attempts_log: Vec::new(),
            backoff_ms: Vec::new(),
        }
    }

    pub fn into_inner(self) -> C {
        self.inner
    }
}

impl<C: ModelClient> ModelClient for RetryingClient<C> {
    fn send(&mut self, request: &ModelRequest) -> Result<ModelResponse, ClientError> {
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.inner.send(request) {
                Ok(resp) => {
                    self.attempts_log.push(attempt);
                    return Ok(resp);
                }
                Err(ClientError::Transient(_)) if attempt < self.max_attempts => {
                    // Capped exponential backoff: 250ms, 500ms, ...
                    self.backoff_ms.push((250u64 << (attempt - 1)).min(2000));
                }
                Err(ClientError::Transient(msg)) => {
                    self.attempts_log.push(attempt);
                    return Err(ClientError::Exhausted {
                        attempts: attempt,
                        last: msg,
                    });
                }
                Err(other) => {
                    self.attempts_log.push(attempt);
                    return Err(other);
                }
            }
        }
    }
}

#[cfg(test)]
pub(crate) struct FlakyClient<C> {
    pub inner: C,
    pub failures_remaining: u32,
}

#[cfg(test)]
impl<C: ModelClient> ModelClient for FlakyClient<C> {
    fn send(&mut self, request: &ModelRequest) -> Result<ModelResponse, ClientError> {
        if self.failures_remaining > 0 {
            self.failures_remaining -= 1;
            return Err(ClientError::Transient("injected".to_string()));
        }
        self.inner.send(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn request(tools: &[&str]) -> ModelRequest {
        ModelRequest {
            system: "sys".to_string(),
            messages: vec![Turn::new("user", "hello")],
            tool_names: tools.iter().map(|s| s.to_string()).collect(),
            temperature: 0.0,
            seed_hint: 0,
        }
    }

    fn call(name: &str) -> ModelAction {
        ModelAction::ToolCall {
            name: name.to_string(),
            args: [("date".to_string(), json!("2026-01-01"))].into_iter().collect(),
        }
    }

    #[test]
    fn scripted_actions_replay_in_order() {
        let mut c = ScriptedClient::new(vec![call("book_meeting"), ModelAction::Finish {
            text: "ok".into(),
        }]);
        let req = request(&["book_meeting"]);
        let r1 = c.send(&req).unwrap();
        assert_eq!(r1.action, call("book_meeting"));
        assert!(r1.tokens_in > 0 && r1.tokens_out > 0);
        let r2 = c.send(&req).unwrap();
        assert_eq!(r2.action, ModelAction::Finish { text: "ok".into() });
        // Exhausted script finishes deterministically.
        let r3 = c.send(&req).unwrap();
        assert!(matches!(r3.action, ModelAction::Finish { .. }));
        // Determinism of token counts.
        let mut c2 = ScriptedClient::new(vec![call("book_meeting")]);
        assert_eq!(c2.send(&req).unwrap().tokens_in, r1.tokens_in);
    }

    #[test]
    fn empty_catalog_constrains_to_finish() {
        let mut c = ScriptedClient::new(vec![call("book_meeting")]);
        let r = c.send(&request(&[])).unwrap();
        assert!(matches!(r.action, ModelAction::Finish { .. }));
    }

    #[test]
    fn two_transport_failures_then_success_is_one_send_three_attempts() {
        let flaky = FlakyClient {
            inner: ScriptedClient::new(vec![ModelAction::Finish { text: "ok".into() }]),
            failures_remaining: 2,
        };
        let mut client = RetryingClient::new(flaky);
        let r = client.send(&request(&[])).unwrap();
        assert_eq!(r.action, ModelAction::Finish { text: "ok".into() });
        assert_eq!(client.attempts_log, vec![3]);
        assert_eq!(client.backoff_ms, vec![250, 500]);
    }

    #[test]
    fn persistent_transient_failure_is_exhausted_after_three() {
        let flaky = FlakyClient {
            inner: ScriptedClient::new(vec![]),
            failures_remaining: 10,
        };
        let mut client = RetryingClient::new(flaky);
        match client.send(&request(&[])) {
            Err(ClientError::Exhausted { attempts: 3, .. }) => {}
            other => panic!("expected Exhausted, got {other:?}"),
        }
    }

    #[test]
    fn fixture_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("script.json");
        let script = vec![call("book_meeting"), ModelAction::Finish { text: "done".into() }];
        std::fs::write(&path, serde_json::to_string(&script).unwrap()).unwrap();
        let mut c = ScriptedClient::from_fixture(&path).unwrap();
        assert_eq!(c.send(&request(&["book_meeting"])).unwrap().action, script[0]);
    }
}
