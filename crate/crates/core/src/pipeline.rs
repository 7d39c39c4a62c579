//! Per-sample orchestration: specification, translation, compile, repair,
//! test, verdict.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CodeSample, Corpus, TestCase};
use crate::gateway::{ChatRequest, Gateway, GatewayError, ModelSettings};
use crate::harness::{classify, CompileStatus, Harness, HarnessError, Outcome, TestVerdict};
use crate::prompting::{
    extract_code, extract_specification, Bindings, PromptError, Specification, TemplateId, TemplateSet,
};
use crate::repair::{RepairPolicy, RepairTrace, Repairer};
use crate::SubjectLanguage;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("sample {sample_id}: {source}")]
    Gateway {
        sample_id: String,
        #[source]
        source: GatewayError,
    },
    #[error("sample {sample_id}: model response was truncated")]
    TruncatedResponse { sample_id: String },
    #[error("sample {sample_id}: {source}")]
    Prompt {
        sample_id: String,
        #[source]
        source: PromptError,
    },
    #[error("no toolchain registered for target `{0}`")]
    UnknownTarget(SubjectLanguage),
    #[error("approach `{0}` needs a specification")]
    MissingSpecification(Approach),
    #[error("could not build worker pool: {0}")]
    WorkerPool(String),
    #[error("result sink: {0}")]
    Sink(#[source] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Approach {
    /// Baseline: translate the source directly.
    #[serde(rename = "source")]
    SourceOnly,
    #[serde(rename = "spec")]
    SpecOnly,
    #[serde(rename = "spec+source")]
    SpecPlusSource,
}

impl Approach {
    pub const ALL: [Approach; 3] = [Approach::SourceOnly, Approach::SpecOnly, Approach::SpecPlusSource];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::SourceOnly => "source",
            Approach::SpecOnly => "spec",
            Approach::SpecPlusSource => "spec+source",
        }
    }

    pub fn needs_spec(self) -> bool {
        self != Approach::SourceOnly
    }

    pub fn template(self) -> TemplateId {
        match self {
            Approach::SourceOnly => TemplateId::TranslateSourceOnly,
            Approach::SpecOnly => TemplateId::TranslateSpecOnly,
            Approach::SpecPlusSource => TemplateId::TranslateSpecPlusSource,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Approach {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Approach::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown approach `{s}` (expected source, spec or spec+source)"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptFlags {
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty_extraction: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated_response: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway_error: Option<String>,
    /// Sandbox or toolchain trouble; the outcome says nothing about the code.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment_failure: Option<String>,
}

/// One evaluated translation. Carries no timings so replayed runs produce
/// identical records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationAttempt {
    pub sample_id: String,
    pub dataset_id: String,
    pub approach: Approach,
    pub source_language: SubjectLanguage,
    pub target_language: SubjectLanguage,
    pub spec: Option<Specification>,
    pub raw_response: Option<String>,
    pub candidate_code: String,
    pub final_code: String,
    /// The final code built successfully.
    pub compiled: bool,
    pub repair: Option<RepairTrace>,
    pub pre_repair_outcome: Outcome,
    pub outcome: Outcome,
    pub test_verdicts: Vec<TestVerdict>,
    pub request_digests: Vec<String>,
    #[serde(default)]
    pub flags: AttemptFlags,
}

impl TranslationAttempt {
    pub fn outcome_for(&self, phase: Phase) -> Outcome {
        match phase {
            Phase::PreRepair => self.pre_repair_outcome,
            Phase::PostRepair => self.outcome,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    PreRepair,
    PostRepair,
}

impl Phase {
    pub const ALL: [Phase; 2] = [Phase::PreRepair, Phase::PostRepair];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PreRepair => "pre_repair",
            Phase::PostRepair => "post_repair",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw translation output before evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub raw_response: String,
    pub request_digest: String,
    pub truncated: bool,
    pub code: Result<String, PromptError>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub final_code: String,
    pub compiled: bool,
    pub repair: Option<RepairTrace>,
    pub pre_repair_outcome: Outcome,
    pub outcome: Outcome,
    pub test_verdicts: Vec<TestVerdict>,
    pub environment_failure: Option<String>,
}

/// What to run: approaches × targets for every admitted sample, skipping
/// targets equal to the sample's own language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub approaches: Vec<Approach>,
    pub targets: Vec<SubjectLanguage>,
}

impl ExperimentPlan {
    pub fn attempt_count(&self, corpus: &Corpus) -> usize {
        corpus
            .samples
            .iter()
            .map(|s| self.approaches.len() * self.targets.iter().filter(|t| **t != s.language).count())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    pub harness: Harness,
    pub gateway: Gateway,
    pub settings: ModelSettings,
    pub templates: TemplateSet,
    pub policy: RepairPolicy,
    pub repair_enabled: bool,
}

impl Pipeline {
    pub fn new(harness: Harness, gateway: Gateway) -> Self {
        Self {
            harness,
            gateway,
            settings: ModelSettings::default(),
            templates: TemplateSet::builtin(),
            policy: RepairPolicy::default(),
            repair_enabled: true,
        }
    }

    fn ask(&self, sample_id: &str, prompt: String) -> Result<crate::gateway::ModelResponse, PipelineError> {
        ChatRequest::new(prompt, &self.settings)
            .and_then(|r| self.gateway.complete(&r))
            .map_err(|source| PipelineError::Gateway {
                sample_id: sample_id.to_string(),
                source,
            })
    }

    pub fn generate_specification(&self, sample: &CodeSample) -> Result<Specification, PipelineError> {
        let prompt = self
            .templates
            .render(
                TemplateId::SpecGen,
                &Bindings::new()
                    .with("source_code", sample.source_text.clone())
                    .with("source_language", sample.language.display_name()),
            )
            .map_err(|source| PipelineError::Prompt {
                sample_id: sample.sample_id.clone(),
                source,
            })?;
        let response = self.ask(&sample.sample_id, prompt)?;
        if response.truncated {
            return Err(PipelineError::TruncatedResponse {
                sample_id: sample.sample_id.clone(),
            });
        }
        let text = extract_specification(&response.raw_text).map_err(|source| PipelineError::Prompt {
            sample_id: sample.sample_id.clone(),
            source,
        })?;
        Ok(Specification {
            sample_id: sample.sample_id.clone(),
            text,
            source_language: sample.language.clone(),
            request_digest: response.request_digest,
        })
    }

    /// One model call (pass@1); extraction failures are returned inside the
    /// [`Translation`] so the raw response is still recorded.
    pub fn translate(
        &self,
        sample: &CodeSample,
        spec: Option<&Specification>,
        approach: Approach,
        target: &SubjectLanguage,
    ) -> Result<Translation, PipelineError> {
        let mut bindings = Bindings::new()
            .with("source_language", sample.language.display_name())
            .with("target_language", target.display_name());
        if approach != Approach::SpecOnly {
            bindings = bindings.with("source_code", sample.source_text.clone());
        }
        if approach.needs_spec() {
            let spec = spec.ok_or(PipelineError::MissingSpecification(approach))?;
            bindings = bindings.with("pseudocode_content", spec.text.clone());
        }
        let prompt = self
            .templates
            .render(approach.template(), &bindings)
            .map_err(|source| PipelineError::Prompt {
                sample_id: sample.sample_id.clone(),
                source,
            })?;
        let response = self.ask(&sample.sample_id, prompt)?;
        let code = extract_code(&response.raw_text, target);
        Ok(Translation {
            raw_response: response.raw_text,
            request_digest: response.request_digest,
            truncated: response.truncated,
            code,
        })
    }

    /// Compile, repair on a build error, then test the final code.
    pub fn evaluate_code(&self, code: &str, target: &SubjectLanguage, tests: &[TestCase]) -> Evaluation {
        let mut eval = Evaluation {
            final_code: code.to_string(),
            compiled: false,
            repair: None,
            pre_repair_outcome: Outcome::CompilationError,
            outcome: Outcome::CompilationError,
            test_verdicts: Vec::new(),
            environment_failure: None,
        };
        let env_failure = |mut eval: Evaluation, e: HarnessError| {
            eval.outcome = Outcome::RuntimeError;
            eval.environment_failure = Some(e.to_string());
            eval
        };

        let program = match self.harness.compile(code, target) {
            Ok(p) => p,
            Err(e) => {
                eval.pre_repair_outcome = Outcome::RuntimeError;
                return env_failure(eval, e);
            }
        };
        let program = match program.compile.status {
            CompileStatus::Ok => Some(program),
            CompileStatus::ToolMissing => {
                eval.environment_failure = Some(program.compile.diagnostics.clone());
                return eval;
            }
            CompileStatus::Error if self.repair_enabled => {
                let repairer = Repairer {
                    harness: &self.harness,
                    gateway: &self.gateway,
                    settings: &self.settings,
                    templates: &self.templates,
                    policy: self.policy,
                };
                match repairer.repair(code, &program.compile, target) {
                    Ok(repaired) => {
                        eval.final_code = repaired.trace.final_code.clone();
                        eval.repair = Some(repaired.trace);
                        repaired.program
                    }
                    Err(crate::repair::RepairError::Harness(e)) => return env_failure(eval, e),
                    Err(e) => {
                        eval.environment_failure = Some(e.to_string());
                        return eval;
                    }
                }
            }
            CompileStatus::Error => None,
        };
        let Some(program) = program else {
            return eval;
        };

        eval.compiled = true;
        match self.harness.run_tests(&program, tests) {
            Ok(run) => {
                eval.outcome = classify(&program.compile, Some(&run));
                eval.test_verdicts = run.verdicts();
            }
            Err(e) => return env_failure(eval, e),
        }
        if eval.repair.is_none() {
            eval.pre_repair_outcome = eval.outcome;
        }
        eval
    }

    /// A full attempt. Never fails: every problem ends up in the record.
    pub fn run_attempt(
        &self,
        sample: &CodeSample,
        spec: Option<&Result<Specification, String>>,
        approach: Approach,
        target: &SubjectLanguage,
    ) -> TranslationAttempt {
        let mut attempt = TranslationAttempt {
            sample_id: sample.sample_id.clone(),
            dataset_id: sample.dataset_id.clone(),
            approach,
            source_language: sample.language.clone(),
            target_language: target.clone(),
            spec: None,
            raw_response: None,
            candidate_code: String::new(),
            final_code: String::new(),
            compiled: false,
            repair: None,
            pre_repair_outcome: Outcome::CompilationError,
            outcome: Outcome::CompilationError,
            test_verdicts: Vec::new(),
            request_digests: Vec::new(),
            flags: AttemptFlags::default(),
        };

        let spec = if approach.needs_spec() {
            match spec {
                Some(Ok(s)) => {
                    attempt.request_digests.push(s.request_digest.clone());
                    attempt.spec = Some(s.clone());
                    Some(s)
                }
                Some(Err(e)) => {
                    attempt.flags.gateway_error = Some(e.clone());
                    return attempt;
                }
                None => {
                    attempt.flags.gateway_error = Some(PipelineError::MissingSpecification(approach).to_string());
                    return attempt;
                }
            }
        } else {
            None
        };

        let translation = match self.translate(sample, spec, approach, target) {
            Ok(t) => t,
            Err(e) => {
                attempt.flags.gateway_error = Some(e.to_string());
                return attempt;
            }
        };
        attempt.request_digests.push(translation.request_digest.clone());
        attempt.raw_response = Some(translation.raw_response.clone());
        if translation.truncated {
            attempt.flags.truncated_response = true;
            return attempt;
        }
        let code = match translation.code {
            Ok(code) => code,
            Err(_) => {
                attempt.flags.empty_extraction = true;
                return attempt;
            }
        };

        let eval = self.evaluate_code(&code, target, &sample.tests);
        attempt.candidate_code = code;
        attempt.final_code = eval.final_code;
        attempt.compiled = eval.compiled;
        if let Some(trace) = &eval.repair {
            attempt
                .request_digests
                .extend(trace.attempts.iter().filter_map(|a| a.request_digest.clone()));
            if let Some(e) = &trace.gateway_error {
                attempt.flags.gateway_error = Some(e.clone());
            }
        }
        attempt.repair = eval.repair;
        attempt.pre_repair_outcome = eval.pre_repair_outcome;
        attempt.outcome = eval.outcome;
        attempt.test_verdicts = eval.test_verdicts;
        attempt.flags.environment_failure = eval.environment_failure;
        attempt
    }

    /// Runs every (sample × approach × target) attempt on `jobs` workers.
    /// Results reach `sink` in plan order (sample, approach, target) as soon
    /// as all their predecessors are done, and are also returned.
    pub fn run_experiment(
        &self,
        corpus: &Corpus,
        plan: &ExperimentPlan,
        jobs: usize,
        sink: &mut dyn FnMut(&TranslationAttempt) -> std::io::Result<()>,
    ) -> Result<Vec<TranslationAttempt>, PipelineError> {
        for target in &plan.targets {
            if !self.harness.registry().contains(target) {
                return Err(PipelineError::UnknownTarget(target.clone()));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| PipelineError::WorkerPool(e.to_string()))?;

        let work: Vec<(&CodeSample, Approach, &SubjectLanguage)> = corpus
            .samples
            .iter()
            .flat_map(|s| {
                plan.approaches.iter().flat_map(move |&a| {
                    plan.targets
                        .iter()
                        .filter(move |t| **t != s.language)
                        .map(move |t| (s, a, t))
                })
            })
            .collect();

        let need_spec: Vec<&CodeSample> = corpus
            .samples
            .iter()
            .filter(|s| {
                work.iter()
                    .any(|(w, a, _)| w.sample_id == s.sample_id && a.needs_spec())
            })
            .collect();
        let specs: HashMap<String, Result<Specification, String>> = pool.install(|| {
            need_spec
                .par_iter()
                .map(|s| {
                    let spec = self.generate_specification(s).map_err(|e| e.to_string());
                    if let Err(e) = &spec {
                        log::warn!("{e}");
                    }
                    (s.sample_id.clone(), spec)
                })
                .collect()
        });

        let (tx, rx) = mpsc::channel();
        let mut results = Vec::with_capacity(work.len());
        let mut sink_error = None;
        std::thread::scope(|scope| {
            scope.spawn(|| {
                pool.install(|| {
                    work.par_iter().enumerate().for_each_with(tx, |tx, (i, (s, a, t))| {
                        let attempt = self.run_attempt(s, specs.get(&s.sample_id), *a, t);
                        log::info!("{} {} -> {} [{}]: {}", s.sample_id, s.language, t, a, attempt.outcome);
                        let _ = tx.send((i, attempt));
                    })
                })
            });
            let mut pending = BTreeMap::new();
            for (i, attempt) in rx {
                pending.insert(i, attempt);
                while let Some(attempt) = pending.remove(&results.len()) {
                    if sink_error.is_none() {
                        if let Err(e) = sink(&attempt) {
                            sink_error = Some(e);
                        }
                    }
                    results.push(attempt);
                }
            }
        });
        match sink_error {
            Some(e) => Err(PipelineError::Sink(e)),
            None => Ok(results),
        }
    }
}

/// Reads a JSON-lines result file.
pub fn read_results(text: &str) -> Result<Vec<TranslationAttempt>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| format!("line {}: {e}", n + 1)))
        .collect()
}

pub fn to_jsonl_line(attempt: &TranslationAttempt) -> String {
    let mut line = serde_json::to_string(attempt).expect("attempt serializes");
    line.push('\n');
    line
}
