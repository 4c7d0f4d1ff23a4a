//! LLM planner: chat-completion transport abstraction, the live HTTPS
//! client, a scripted transport for offline fixtures, and the plan loop
//! with a single repair round on parse failure.

use super::{build_prompt, parse_tool_calls, Plan, PlanRequest, Planner, PlannerError};
use serde::{Deserialize, Serialize};
use std::sync::Mutex;
use std::time::Duration;
use thiserror::Error;

pub const ENV_ENDPOINT: &str = "GRID_AGENT_LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "GRID_AGENT_LLM_API_KEY";
pub const ENV_MODEL: &str = "GRID_AGENT_LLM_MODEL";

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct TransportError(pub String);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: &str, content: impl Into<String>) -> Self {
        ChatMessage {
            role: role.to_string(),
            content: content.into(),
        }
    }
}

/// Chat-completion request body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// Forwarded verbatim when set; transports that do not understand it
    /// ignore it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thinking_budget: Option<u64>,
}

pub trait ChatTransport: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

/// Client settings. The API key itself is never stored, only the name of
/// the environment variable holding it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmClientConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thinking_budget: Option<u64>,
}

impl LlmClientConfig {
    pub fn from_env() -> Result<Self, String> {
        let endpoint = std::env::var(ENV_ENDPOINT)
            .map_err(|_| format!("{ENV_ENDPOINT} is not set"))?;
        let model = std::env::var(ENV_MODEL).map_err(|_| format!("{ENV_MODEL} is not set"))?;
        Ok(LlmClientConfig {
            endpoint,
            model,
            api_key_env: ENV_API_KEY.to_string(),
            timeout_secs: 60,
            max_retries: 2,
            thinking_budget: None,
        })
    }
}

/// Live HTTPS chat-completion client.
pub struct HttpChatTransport {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpChatTransport {
    pub fn new(cfg: &LlmClientConfig) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .build();
        HttpChatTransport {
            agent: ureq::Agent::new_with_config(config),
            endpoint: cfg.endpoint.clone(),
            api_key: std::env::var(&cfg.api_key_env).ok(),
        }
    }
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ChatResponseMessage {
    content: String,
}

impl ChatTransport for HttpChatTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut builder = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            builder = builder.header("authorization", format!("Bearer {key}"));
        }
        let mut response = builder
            .send_json(request)
            .map_err(|e| TransportError(e.to_string()))?;
        let parsed: ChatResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| TransportError(format!("malformed completion response: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportError("completion response has no choices".to_string()))
    }
}

/// Replays a recorded sequence of responses; used by offline tests and the
/// `--fixture` CLI mode.
pub struct ScriptedTransport {
    responses: Mutex<std::collections::VecDeque<Result<String, TransportError>>>,
    pub requests_seen: Mutex<Vec<ChatRequest>>,
}

impl ScriptedTransport {
    pub fn new(responses: Vec<Result<String, TransportError>>) -> Self {
        ScriptedTransport {
            responses: Mutex::new(responses.into()),
            requests_seen: Mutex::new(Vec::new()),
        }
    }

    pub fn from_texts(texts: Vec<String>) -> Self {
        Self::new(texts.into_iter().map(Ok).collect())
    }
}

impl ChatTransport for ScriptedTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        self.requests_seen.lock().unwrap().push(request.clone());
        self.responses
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Err(TransportError("fixture script exhausted".to_string())))
    }
}

fn call_with_retries(
    transport: &dyn ChatTransport,
    cfg: &LlmClientConfig,
    messages: &[ChatMessage],
) -> Result<String, TransportError> {
    let request = ChatRequest {
        model: cfg.model.clone(),
        messages: messages.to_vec(),
        temperature: None,
        thinking_budget: cfg.thinking_budget,
    };
    let mut last = TransportError("no attempt made".to_string());
    for _ in 0..=cfg.max_retries {
        match transport.complete(&request) {
            Ok(text) => return Ok(text),
            Err(err) => last = err,
        }
    }
    Err(last)
}

/// Ask the model for a plan. On a parse failure the diagnostic is appended
/// and the model is re-prompted exactly once ("repair prompt"); a second
/// failure is an error.
pub fn plan_llm(
    req: &PlanRequest,
    cfg: &LlmClientConfig,
    transport: &dyn ChatTransport,
) -> Result<Plan, PlannerError> {
    let prompt = build_prompt(req);
    let mut messages = vec![
        ChatMessage::new("system", prompt.system),
        ChatMessage::new("user", prompt.user),
    ];
    let text = call_with_retries(transport, cfg, &messages)?;
    match parse_tool_calls(&text, &req.available_actions) {
        Ok(mut plan) => {
            plan.planner_id = cfg.model.clone();
            Ok(plan)
        }
        Err(diagnostic) => {
            messages.push(ChatMessage::new("assistant", text));
            messages.push(ChatMessage::new(
                "user",
                format!(
                    "Your previous response could not be parsed: {diagnostic}. \
                     Respond again with JSON only, exactly matching the output schema."
                ),
            ));
            let retry_text = call_with_retries(transport, cfg, &messages)?;
            match parse_tool_calls(&retry_text, &req.available_actions) {
                Ok(mut plan) => {
                    plan.planner_id = cfg.model.clone();
                    Ok(plan)
                }
                Err(second) => Err(PlannerError::UnparseableAfterRepair(second.to_string())),
            }
        }
    }
}

/// [`Planner`] wrapper around a transport + config pair.
pub struct LlmPlanner {
    pub cfg: LlmClientConfig,
    pub transport: Box<dyn ChatTransport>,
}

impl Planner for LlmPlanner {
    fn id(&self) -> String {
        self.cfg.model.clone()
    }

    fn plan(&self, req: &PlanRequest, _eval: &mut super::EvalFn) -> Result<Plan, PlannerError> {
        plan_llm(req, &self.cfg, self.transport.as_ref())
    }
}
