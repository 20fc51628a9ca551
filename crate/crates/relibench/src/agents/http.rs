//! Live chat-completions backend. Only compiled with the `live`
//! feature; simulation runs use the scripted backends instead.

use serde_json::{json, Value};

use crate::agents::client::{ClientError, ModelAction, ModelClient, ModelRequest, ModelResponse};
use crate::core::types::ToolArgs;

/// Environment variable holding the API key.
pub const API_KEY_ENV: &str = "RELIBENCH_API_KEY";
/// Environment variable overriding the endpoint URL.
pub const ENDPOINT_ENV: &str = "RELIBENCH_ENDPOINT";

pub struct HttpClient {
    endpoint: String,
    api_key: String,
    model: String,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(model: &str) -> Result<Self, ClientError> {
        let api_key = std::env::var(API_KEY_ENV)
            .map_err(|_| ClientError::Auth(format!("{API_KEY_ENV} not set")))?;
        let endpoint = std::env::var(ENDPOINT_ENV)
            .unwrap_or_else(|_| "https://api.openai.com/v1/chat/completions".to_string());
        Ok(HttpClient {
            endpoint,
            api_key,
            model: model.to_string(),
            http: reqwest::blocking::Client::new(),
        })
    }

    fn parse_choice(&self, body: &Value) -> Result<ModelAction, ClientError> {
        let message = &body["choices"][0]["message"];
        if let Some(calls) = message["tool_calls"].as_array() {
            if calls.len() > 1 {
                return Err(ClientError::Permanent(
                    "parallel tool calls are not supported".to_string(),
                ));
            }
            if let Some(call) = calls.first() {
                let name = call["function"]["name"].as_str().unwrap_or_default().to_string();
                let args: ToolArgs = call["function"]["arguments"]
                    .as_str()
                    .and_then(|a| serde_json::from_str(a).ok())
                    .unwrap_or_default();
                return Ok(ModelAction::ToolCall { name, args });
            }
        }
        Ok(ModelAction::Finish {
            text: message["content"].as_str().unwrap_or_default().to_string(),
        })
    }
}

impl ModelClient for HttpClient {
    fn send(&mut self, request: &ModelRequest) -> Result<ModelResponse, ClientError> {
        let mut messages = vec![json!({"role": "system", "content": request.system})];
        for turn in &request.messages {
            messages.push(json!({"role": turn.role, "content": turn.content}));
        }
        let payload = json!({
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "seed": request.seed_hint,
        });
        let resp = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&payload)
            .send()
            .map_err(|e| {
                if e.is_timeout() || e.is_connect() {
                    ClientError::Transient(e.to_string())
                } else {
                    ClientError::Permanent(e.to_string())
                }
            })?;
        match resp.status().as_u16() {
            401 | 403 => return Err(ClientError::Auth("rejected credentials".to_string())),
            429 => return Err(ClientError::Quota("rate limited".to_string())),
            s if s >= 500 => return Err(ClientError::Transient(format!("server status {s}"))),
            _ => {}
        }
        let body: Value = resp
            .json()
            .map_err(|e| ClientError::Permanent(format!("decode response: {e}")))?;
        let action = self.parse_choice(&body)?;
        Ok(ModelResponse {
            action,
            tokens_in: body["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
            tokens_out: body["usage"]["completion_tokens"].as_u64().unwrap_or(0),
        })
    }
}
