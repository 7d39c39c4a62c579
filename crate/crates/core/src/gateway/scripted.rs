use std::collections::HashMap;
use std::sync::Arc;

use super::{BackendKind, ChatRequest, Completion, CompletionBackend, GatewayError};

type Rule = Arc<dyn Fn(&ChatRequest) -> Option<String> + Send + Sync>;

/// Deterministic responses for tests and fixture generation: exact digest
/// matches first, then rules in registration order. Anything unanswered is
/// a [`GatewayError::FixtureMiss`].
#[derive(Clone, Default)]
pub struct ScriptedBackend {
    by_digest: HashMap<String, String>,
    rules: Vec<Rule>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_response(mut self, digest: &str, text: impl Into<String>) -> Self {
        self.by_digest.insert(digest.to_string(), text.into());
        self
    }

    pub fn with_rule(mut self, rule: impl Fn(&ChatRequest) -> Option<String> + Send + Sync + 'static) -> Self {
        self.rules.push(Arc::new(rule));
        self
    }
}

impl CompletionBackend for ScriptedBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Scripted
    }

    fn complete(&self, request: &ChatRequest, digest: &str) -> Result<Completion, GatewayError> {
        let text = self
            .by_digest
            .get(digest)
            .cloned()
            .or_else(|| self.rules.iter().find_map(|rule| rule(request)));
        text.map(|text| Completion { text, truncated: false })
            .ok_or_else(|| GatewayError::FixtureMiss {
                digest: digest.to_string(),
            })
    }
}
