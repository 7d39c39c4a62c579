//! Single-turn text completion behind interchangeable backends.
//!
//! Every request is keyed by a digest of its canonical form. Replay answers
//! from a JSON-lines fixture file keyed by that digest; live and scripted
//! backends can record into the same format, so a recorded session replays
//! bit-for-bit.

mod fixture;
mod live;
mod scripted;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use fixture::{FixtureEntry, FixtureLog, FixtureStore};
pub use live::{LiveBackend, LiveConfig, ENV_API_KEY, ENV_API_URL};
pub use scripted::ScriptedBackend;

pub const DEFAULT_MODEL: &str = "gpt-4";
pub const DEFAULT_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_MAX_OUTPUT: u32 = 4096;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("environment variable {0} is not set")]
    AuthMissing(&'static str),
    #[error("transport failure after {attempts} attempt(s): {message}")]
    TransportFailure { attempts: u32, message: String },
    #[error("provider returned HTTP {status}: {body}")]
    Provider { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("no fixture for request digest {digest}")]
    FixtureMiss { digest: String },
    #[error("fixture file {path}: {message}")]
    Fixture { path: String, message: String },
}

impl GatewayError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, GatewayError::TransportFailure { .. })
    }
}

/// Model settings shared by every request of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSettings {
    pub model_id: String,
    pub temperature: f64,
    pub max_output: u32,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            model_id: DEFAULT_MODEL.to_string(),
            temperature: DEFAULT_TEMPERATURE,
            max_output: DEFAULT_MAX_OUTPUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub prompt_text: String,
    pub temperature: f64,
    pub model_id: String,
    pub max_output: u32,
}

impl ChatRequest {
    pub fn new(prompt_text: impl Into<String>, settings: &ModelSettings) -> Result<Self, GatewayError> {
        let request = Self {
            prompt_text: prompt_text.into(),
            temperature: settings.temperature,
            model_id: settings.model_id.clone(),
            max_output: settings.max_output,
        };
        request.validate()?;
        Ok(request)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.prompt_text.is_empty() {
            return Err(GatewayError::InvalidRequest("prompt_text is empty".into()));
        }
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} outside [0, 1]",
                self.temperature
            )));
        }
        if self.max_output == 0 {
            return Err(GatewayError::InvalidRequest("max_output must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct CanonicalRequest<'a> {
    max_output: u32,
    model_id: &'a str,
    prompt_text: &'a str,
    temperature: String,
}

/// SHA-256 over a canonical JSON rendering: keys in lexical order,
/// temperature in shortest round-trip decimal form. No whitespace or
/// semantic normalization of the prompt.
pub fn fixture_key(request: &ChatRequest) -> String {
    let canonical = CanonicalRequest {
        max_output: request.max_output,
        model_id: &request.model_id,
        prompt_text: &request.prompt_text,
        temperature: format!("{}", request.temperature),
    };
    let bytes = serde_json::to_vec(&canonical).expect("canonical request serializes");
    sha256_hex(&bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Live,
    Replay,
    Scripted,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(BackendKind::Live),
            "replay" => Ok(BackendKind::Replay),
            "scripted" => Ok(BackendKind::Scripted),
            other => Err(format!("unknown backend `{other}` (expected live, replay or scripted)")),
        }
    }
}

/// Raw backend answer before it is wrapped into a [`ModelResponse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    /// The provider stopped because the output budget ran out.
    pub truncated: bool,
}

pub trait CompletionBackend: Send + Sync {
    fn kind(&self) -> BackendKind;
    fn complete(&self, request: &ChatRequest, digest: &str) -> Result<Completion, GatewayError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelResponse {
    pub raw_text: String,
    pub backend: BackendKind,
    pub request_digest: String,
    pub truncated: bool,
}

#[derive(Debug, Default)]
struct Counters {
    live: AtomicUsize,
    replay: AtomicUsize,
    scripted: AtomicUsize,
}

/// Call counts per backend since the gateway was built.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GatewayStats {
    pub live_calls: usize,
    pub replay_hits: usize,
    pub scripted_calls: usize,
}

/// The completion service handed to the pipeline. Cheap to clone.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn CompletionBackend>,
    recorder: Option<Arc<FixtureLog>>,
    counters: Arc<Counters>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("backend", &self.backend.kind())
            .field("recording", &self.recorder.is_some())
            .finish()
    }
}

impl Gateway {
    pub fn new(backend: impl CompletionBackend + 'static) -> Self {
        Self {
            backend: Arc::new(backend),
            recorder: None,
            counters: Arc::default(),
        }
    }

    pub fn replay(store: FixtureStore) -> Self {
        Self::new(store)
    }

    /// Appends every non-replayed completion to `log`. Entries already in
    /// the log are answered from it first, so a resumed run only calls the
    /// backend for requests it has not seen.
    pub fn with_recording(mut self, log: FixtureLog) -> Self {
        self.recorder = Some(Arc::new(log));
        self
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.backend.kind()
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            live_calls: self.counters.live.load(Ordering::Relaxed),
            replay_hits: self.counters.replay.load(Ordering::Relaxed),
            scripted_calls: self.counters.scripted.load(Ordering::Relaxed),
        }
    }

    pub fn complete(&self, request: &ChatRequest) -> Result<ModelResponse, GatewayError> {
        request.validate()?;
        let digest = fixture_key(request);

        if let Some(entry) = self.recorder.as_ref().and_then(|log| log.lookup(&digest)) {
            self.counters.replay.fetch_add(1, Ordering::Relaxed);
            return Ok(ModelResponse {
                raw_text: entry.response_text.clone(),
                backend: BackendKind::Replay,
                request_digest: digest,
                truncated: entry.truncated,
            });
        }

        let kind = self.backend.kind();
        let counter = match kind {
            BackendKind::Live => &self.counters.live,
            BackendKind::Replay => &self.counters.replay,
            BackendKind::Scripted => &self.counters.scripted,
        };
        if kind != BackendKind::Replay {
            counter.fetch_add(1, Ordering::Relaxed);
        }
        let completion = self.backend.complete(request, &digest)?;
        if kind == BackendKind::Replay {
            counter.fetch_add(1, Ordering::Relaxed);
        }

        if kind != BackendKind::Replay {
            if let Some(log) = &self.recorder {
                log.append(&FixtureEntry::new(request, &digest, &completion))?;
            }
        }
        Ok(ModelResponse {
            raw_text: completion.text,
            backend: kind,
            request_digest: digest,
            truncated: completion.truncated,
        })
    }
}
