//! Run configuration shared by the CLI and the run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{BackendKind, ModelSettings};
use crate::harness::ExecLimits;
use crate::language::DEFAULT_LANGUAGES;
use crate::pipeline::Approach;
use crate::repair::RepairPolicy;
use crate::SubjectLanguage;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {message}")]
    Invalid { path: String, message: String },
}

/// Every knob of a run. Missing fields take the defaults, so a partial file
/// is valid; an emitted config reloads to an identical plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus_root: Option<PathBuf>,
    pub approaches: Vec<Approach>,
    pub targets: Vec<SubjectLanguage>,
    pub backend: BackendKind,
    pub fixtures: Option<PathBuf>,
    pub record: bool,
    /// Rules file for the scripted backend.
    pub script: Option<PathBuf>,
    pub model: ModelSettings,
    pub repair: RepairPolicy,
    pub repair_enabled: bool,
    pub limits: ExecLimits,
    pub toolchains: Option<PathBuf>,
    pub template_dir: Option<PathBuf>,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus_root: None,
            approaches: vec![Approach::SpecOnly, Approach::SpecPlusSource],
            targets: DEFAULT_LANGUAGES
                .iter()
                .map(|l| SubjectLanguage::new(*l).expect("non-empty"))
                .collect(),
            backend: BackendKind::Replay,
            fixtures: None,
            record: false,
            script: None,
            model: ModelSettings::default(),
            repair: RepairPolicy::default(),
            repair_enabled: true,
            limits: ExecLimits::default(),
            toolchains: None,
            template_dir: None,
            out: PathBuf::from("results.jsonl"),
            report: None,
            jobs: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let invalid = |message: String| ConfigError::Invalid {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| invalid(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
