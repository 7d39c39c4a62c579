//! Compile-error repair: feed compiler diagnostics back to the model for a
//! bounded number of rounds, always repairing the latest candidate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{ChatRequest, Gateway, ModelSettings};
use crate::harness::{CompileResult, CompileStatus, Harness, HarnessError, PreparedProgram};
use crate::prompting::{extract_code, Bindings, PromptError, TemplateId, TemplateSet};
use crate::SubjectLanguage;

pub const DEFAULT_MAX_ITERATIONS: u32 = 3;
pub const DEFAULT_DIAGNOSTICS_LIMIT: usize = 16 * 1024;
const TRUNCATION_NOTE: &str = "\n[diagnostics truncated]";

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("max_iterations must be at least 1")]
    InvalidPolicy,
    #[error("code does not need repair (compile status {0:?})")]
    NotRepairable(CompileStatus),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairPolicy {
    pub max_iterations: u32,
    /// Byte cap on the `err_context` sent to the model; the head is kept.
    pub diagnostics_limit: usize,
}

impl Default for RepairPolicy {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            diagnostics_limit: DEFAULT_DIAGNOSTICS_LIMIT,
        }
    }
}

impl RepairPolicy {
    pub fn validate(&self) -> Result<(), RepairError> {
        if self.max_iterations == 0 {
            Err(RepairError::InvalidPolicy)
        } else {
            Ok(())
        }
    }
}

/// One model call inside the loop. `compile_status` is `None` when nothing
/// was compiled (gateway failure, empty extraction, truncated response).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairAttempt {
    pub code_before: String,
    pub diagnostics: String,
    pub code_after: String,
    pub compile_status: Option<CompileStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_digest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairTrace {
    pub attempts: Vec<RepairAttempt>,
    pub final_code: String,
    pub fixed: bool,
    pub iterations_used: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway_error: Option<String>,
}

/// The trace plus the compiled program when the loop ended on a good build,
/// so the caller can run tests on exactly `final_code`.
#[derive(Debug)]
pub struct Repaired {
    pub trace: RepairTrace,
    pub program: Option<PreparedProgram>,
}

pub fn truncate_diagnostics(diagnostics: &str, limit: usize) -> String {
    if diagnostics.len() <= limit {
        return diagnostics.to_string();
    }
    let mut cut = limit;
    while !diagnostics.is_char_boundary(cut) {
        cut -= 1;
    }
    format!("{}{TRUNCATION_NOTE}", &diagnostics[..cut])
}

/// Everything the loop needs besides the code itself.
#[derive(Debug, Clone, Copy)]
pub struct Repairer<'a> {
    pub harness: &'a Harness,
    pub gateway: &'a Gateway,
    pub settings: &'a ModelSettings,
    pub templates: &'a TemplateSet,
    pub policy: RepairPolicy,
}

impl Repairer<'_> {
    /// `initial` is the failed build of `code`. Anything other than a
    /// compilation error is refused without touching the gateway.
    pub fn repair(
        &self,
        code: &str,
        initial: &CompileResult,
        target: &SubjectLanguage,
    ) -> Result<Repaired, RepairError> {
        self.policy.validate()?;
        if initial.status != CompileStatus::Error {
            return Err(RepairError::NotRepairable(initial.status));
        }

        let mut attempts = Vec::new();
        let mut current = code.to_string();
        let mut diagnostics = initial.diagnostics.clone();
        let mut program = None;
        let mut gateway_error = None;

        for _ in 0..self.policy.max_iterations {
            let err_context = truncate_diagnostics(&diagnostics, self.policy.diagnostics_limit);
            let prompt = self.templates.render(
                TemplateId::RepairCompile,
                &Bindings::new()
                    .with("target_code", current.clone())
                    .with("target_language", target.display_name())
                    .with("err_context", err_context.clone()),
            )?;
            let mut attempt = RepairAttempt {
                code_before: current.clone(),
                diagnostics: err_context,
                code_after: String::new(),
                compile_status: None,
                request_digest: None,
                note: None,
            };

            let response = ChatRequest::new(prompt, self.settings).and_then(|r| self.gateway.complete(&r));
            let response = match response {
                Ok(r) => r,
                Err(e) => {
                    attempt.note = Some(format!("gateway failure: {e}"));
                    gateway_error = Some(e.to_string());
                    attempts.push(attempt);
                    break;
                }
            };
            attempt.request_digest = Some(response.request_digest.clone());
            if response.truncated {
                attempt.note = Some("truncated response".into());
                attempts.push(attempt);
                continue;
            }
            let candidate = match extract_code(&response.raw_text, target) {
                Ok(c) => c,
                Err(e) => {
                    attempt.note = Some(e.to_string());
                    attempts.push(attempt);
                    continue;
                }
            };

            let built = self.harness.compile(&candidate, target)?;
            attempt.code_after = candidate.clone();
            attempt.compile_status = Some(built.compile.status);
            attempts.push(attempt);
            current = candidate;
            match built.compile.status {
                CompileStatus::Ok => {
                    program = Some(built);
                    break;
                }
                CompileStatus::Error => diagnostics = built.compile.diagnostics.clone(),
                CompileStatus::ToolMissing => break,
            }
        }

        let fixed = program.is_some();
        Ok(Repaired {
            trace: RepairTrace {
                iterations_used: attempts.len() as u32,
                attempts,
                final_code: current,
                fixed,
                gateway_error,
            },
            program,
        })
    }
}
