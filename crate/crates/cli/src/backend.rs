use std::path::Path;

use bench_core::config::RunConfig;
use bench_core::gateway::{BackendKind, FixtureLog, FixtureStore, Gateway, LiveBackend, ScriptedBackend};
use serde::Deserialize;

use crate::commands::CliError;

/// One scripted answer: chosen by exact digest, or by the first rule whose
/// `contains` text occurs in the prompt.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptRule {
    #[serde(default)]
    digest: Option<String>,
    #[serde(default)]
    contains: Option<String>,
    response: String,
}

fn load_script(path: &Path) -> Result<ScriptedBackend, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let rules: Vec<ScriptRule> =
        serde_json::from_str(&text).map_err(|e| CliError::new("config", format!("script {}: {e}", path.display())))?;
    let mut backend = ScriptedBackend::new();
    for rule in rules {
        match (rule.digest, rule.contains) {
            (Some(d), _) => backend = backend.with_response(&d, rule.response),
            (None, Some(needle)) => {
                let response = rule.response;
                backend = backend.with_rule(move |req| req.prompt_text.contains(&needle).then(|| response.clone()));
            }
            (None, None) => {
                let response = rule.response;
                backend = backend.with_rule(move |_| Some(response.clone()));
            }
        }
    }
    Ok(backend)
}

pub fn build_gateway(cfg: &RunConfig) -> Result<Gateway, CliError> {
    let gateway = match cfg.backend {
        BackendKind::Replay => {
            if cfg.record {
                return Err(CliError::new(
                    "config",
                    "--record has no effect with the replay backend",
                ));
            }
            let path = cfg
                .fixtures
                .as_deref()
                .ok_or_else(|| CliError::new("config", "the replay backend needs --fixtures"))?;
            return Ok(Gateway::replay(FixtureStore::load(path).map_err(CliError::gateway)?));
        }
        BackendKind::Live => Gateway::new(LiveBackend::from_env().map_err(CliError::gateway)?),
        BackendKind::Scripted => {
            let path = cfg
                .script
                .as_deref()
                .ok_or_else(|| CliError::new("config", "the scripted backend needs --script"))?;
            Gateway::new(load_script(path)?)
        }
    };
    if !cfg.record {
        return Ok(gateway);
    }
    let path = cfg
        .fixtures
        .as_deref()
        .ok_or_else(|| CliError::new("config", "--record needs --fixtures"))?;
    Ok(gateway.with_recording(FixtureLog::open(path).map_err(CliError::gateway)?))
}
