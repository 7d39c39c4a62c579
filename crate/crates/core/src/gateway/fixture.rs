use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{sha256_hex, BackendKind, ChatRequest, Completion, CompletionBackend, GatewayError};

/// One line of a fixture file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub digest: String,
    pub model_id: String,
    pub temperature: f64,
    pub prompt_sha: String,
    pub response_text: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl FixtureEntry {
    pub fn new(request: &ChatRequest, digest: &str, completion: &Completion) -> Self {
        Self {
            digest: digest.to_string(),
            model_id: request.model_id.clone(),
            temperature: request.temperature,
            prompt_sha: sha256_hex(request.prompt_text.as_bytes()),
            response_text: completion.text.clone(),
            truncated: completion.truncated,
        }
    }
}

fn fixture_error(path: &Path, message: impl Into<String>) -> GatewayError {
    GatewayError::Fixture {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn parse_lines(path: &Path, text: &str) -> Result<Vec<FixtureEntry>, GatewayError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, line)| serde_json::from_str(line).map_err(|e| fixture_error(path, format!("line {}: {e}", n + 1))))
        .collect()
}

/// Read-only digest → response table; the replay backend.
#[derive(Debug, Clone, Default)]
pub struct FixtureStore {
    entries: HashMap<String, FixtureEntry>,
}

impl FixtureStore {
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path).map_err(|e| fixture_error(path, e.to_string()))?;
        Ok(Self::from_entries(parse_lines(path, &text)?))
    }

    /// The first entry for a digest wins.
    pub fn from_entries(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        let mut map = HashMap::new();
        for entry in entries {
            map.entry(entry.digest.clone()).or_insert(entry);
        }
        Self { entries: map }
    }

    pub fn get(&self, digest: &str) -> Option<&FixtureEntry> {
        self.entries.get(digest)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl CompletionBackend for FixtureStore {
    fn kind(&self) -> BackendKind {
        BackendKind::Replay
    }

    fn complete(&self, _request: &ChatRequest, digest: &str) -> Result<Completion, GatewayError> {
        self.get(digest)
            .map(|e| Completion {
                text: e.response_text.clone(),
                truncated: e.truncated,
            })
            .ok_or_else(|| GatewayError::FixtureMiss {
                digest: digest.to_string(),
            })
    }
}

struct LogState {
    file: File,
    entries: HashMap<String, FixtureEntry>,
}

/// Append-only fixture file with a single serialized writer. Appends are
/// keyed by digest, so a retried or repeated request is written once.
pub struct FixtureLog {
    path: PathBuf,
    state: Mutex<LogState>,
}

impl FixtureLog {
    /// Opens (creating if needed) a fixture file and indexes what it holds.
    pub fn open(path: &Path) -> Result<Self, GatewayError> {
        let existing = match std::fs::read_to_string(path) {
            Ok(text) => parse_lines(path, &text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(fixture_error(path, e.to_string())),
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| fixture_error(path, e.to_string()))?;
        let mut entries = HashMap::new();
        for entry in existing {
            entries.entry(entry.digest.clone()).or_insert(entry);
        }
        Ok(Self {
            path: path.to_path_buf(),
            state: Mutex::new(LogState { file, entries }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn lookup(&self, digest: &str) -> Option<FixtureEntry> {
        self.state
            .lock()
            .expect("fixture log poisoned")
            .entries
            .get(digest)
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("fixture log poisoned").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Returns `false` when the digest was already present.
    pub fn append(&self, entry: &FixtureEntry) -> Result<bool, GatewayError> {
        let mut state = self.state.lock().expect("fixture log poisoned");
        if state.entries.contains_key(&entry.digest) {
            return Ok(false);
        }
        let mut line = serde_json::to_string(entry).expect("fixture entry serializes");
        line.push('\n');
        state
            .file
            .write_all(line.as_bytes())
            .and_then(|_| state.file.flush())
            .map_err(|e| fixture_error(&self.path, e.to_string()))?;
        state.entries.insert(entry.digest.clone(), entry.clone());
        Ok(true)
    }
}
