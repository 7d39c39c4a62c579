use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{BackendKind, ChatRequest, Completion, CompletionBackend, GatewayError};

pub const ENV_API_KEY: &str = "MODEL_API_KEY";
pub const ENV_API_URL: &str = "MODEL_API_URL";
pub const DEFAULT_API_URL: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone)]
pub struct LiveConfig {
    /// Base URL or full `/chat/completions` endpoint.
    pub url: String,
    pub api_key: String,
    pub deadline: Duration,
    pub attempts: u32,
    pub backoff: Duration,
}

impl LiveConfig {
    pub fn new(url: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            api_key: api_key.into(),
            deadline: Duration::from_secs(300),
            attempts: 3,
            backoff: Duration::from_secs(2),
        }
    }

    pub fn from_env() -> Result<Self, GatewayError> {
        let key = std::env::var(ENV_API_KEY)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or(GatewayError::AuthMissing(ENV_API_KEY))?;
        let url = std::env::var(ENV_API_URL)
            .ok()
            .filter(|u| !u.trim().is_empty())
            .unwrap_or_else(|| DEFAULT_API_URL.to_string());
        Ok(Self::new(url, key))
    }

    pub fn endpoint(&self) -> String {
        let base = self.url.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

/// OpenAI-compatible chat-completions client. Transport errors, 429 and 5xx
/// are retried with exponential backoff; other HTTP errors are final.
pub struct LiveBackend {
    config: LiveConfig,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

enum Failure {
    Retry(String),
    Final(GatewayError),
}

impl LiveBackend {
    pub fn new(config: LiveConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.deadline)
            .build()
            .map_err(|e| GatewayError::TransportFailure {
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(Self { config, client })
    }

    pub fn from_env() -> Result<Self, GatewayError> {
        Self::new(LiveConfig::from_env()?)
    }

    fn attempt(&self, request: &ChatRequest) -> Result<Completion, Failure> {
        let body = json!({
            "model": request.model_id,
            "temperature": request.temperature,
            "max_tokens": request.max_output,
            "messages": [{"role": "user", "content": request.prompt_text}],
        });
        let response = self
            .client
            .post(self.config.endpoint())
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| Failure::Retry(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| Failure::Retry(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(Failure::Retry(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(Failure::Final(GatewayError::Provider {
                status: status.as_u16(),
                body: text,
            }));
        }
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| Failure::Final(GatewayError::MalformedResponse(e.to_string())))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Failure::Final(GatewayError::MalformedResponse("no choices".into())))?;
        Ok(Completion {
            text: choice.message.content.unwrap_or_default(),
            truncated: choice.finish_reason.as_deref() == Some("length"),
        })
    }
}

impl CompletionBackend for LiveBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Live
    }

    fn complete(&self, request: &ChatRequest, _digest: &str) -> Result<Completion, GatewayError> {
        let attempts = self.config.attempts.max(1);
        let mut last = String::new();
        for n in 0..attempts {
            if n > 0 {
                std::thread::sleep(self.config.backoff * 2u32.pow(n - 1));
            }
            match self.attempt(request) {
                Ok(c) => return Ok(c),
                Err(Failure::Final(e)) => return Err(e),
                Err(Failure::Retry(msg)) => {
                    log::warn!("model call attempt {} failed: {msg}", n + 1);
                    last = msg;
                }
            }
        }
        Err(GatewayError::TransportFailure {
            attempts,
            message: last,
        })
    }
}
