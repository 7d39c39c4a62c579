//! Benchmark corpora: loading, validation against the original programs, and
//! repair of truncated expected outputs.
//!
//! On-disk layout: `<root>/manifest.json` plus one source file per sample and
//! a pair of raw `*.in` / `*.out` files per test case.
//!
//! ```json
//! {
//!   "dataset_id": "avatar",
//!   "samples": [
//!     { "sample_id": "atcoder_ABC042_A", "language": "python",
//!       "source_file": "python/atcoder_ABC042_A.py",
//!       "tests": [ { "in_file": "tests/atcoder_ABC042_A/0.in",
//!                    "out_file": "tests/atcoder_ABC042_A/0.out" } ] }
//!   ]
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{normalize_output, CompileStatus, Harness, HarnessError};
use crate::language::SubjectLanguage;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRUNCATION_MARKER: &str = "...";

pub const REASON_NO_VALID_TEST: &str = "no valid test case";
pub const REASON_UNCOMPILABLE: &str = "source uncompilable";
pub const REASON_TIMEOUT: &str = "source timed out";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest not found at {0}")]
    MissingManifest(PathBuf),
    #[error("malformed manifest {path}: {message}")]
    MalformedManifest { path: PathBuf, message: String },
    #[error("duplicate sample_id `{0}`")]
    DuplicateSampleId(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is not valid UTF-8")]
    InvalidUtf8(PathBuf),
    #[error("validation report references unknown sample `{0}`")]
    ReportSampleMismatch(String),
    #[error("no validation report for sample `{0}`")]
    MissingReport(String),
    #[error("sample `{sample_id}`: {source}")]
    Harness {
        sample_id: String,
        #[source]
        source: HarnessError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    pub expected_output: String,
    /// Expected output ends with `...` (after trailing-whitespace trim).
    pub truncated: bool,
    /// Paths relative to the corpus root.
    pub in_file: String,
    pub out_file: String,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected_output: impl Into<String>) -> Self {
        let expected_output = expected_output.into();
        Self {
            input: input.into(),
            truncated: is_truncated(&expected_output),
            expected_output,
            in_file: String::new(),
            out_file: String::new(),
        }
    }

    /// Expected output with the trailing marker removed, when truncated.
    pub fn expected_prefix(&self) -> Option<&str> {
        self.expected_output
            .trim_end()
            .strip_suffix(TRUNCATION_MARKER)
            .filter(|_| self.truncated)
    }
}

pub fn is_truncated(expected_output: &str) -> bool {
    expected_output.trim_end().ends_with(TRUNCATION_MARKER)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSample {
    pub sample_id: String,
    pub language: SubjectLanguage,
    pub source_text: String,
    pub tests: Vec<TestCase>,
    pub dataset_id: String,
    pub source_file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub sample_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub dataset_id: String,
    pub samples: Vec<CodeSample>,
    pub excluded: Vec<Exclusion>,
}

impl Corpus {
    pub fn sample(&self, sample_id: &str) -> Option<&CodeSample> {
        self.samples.iter().find(|s| s.sample_id == sample_id)
    }

    pub fn languages(&self) -> BTreeSet<SubjectLanguage> {
        self.samples.iter().map(|s| s.language.clone()).collect()
    }

    /// Languages used by samples that have no registered toolchain.
    pub fn unregistered_languages(&self, harness: &Harness) -> Vec<SubjectLanguage> {
        self.languages()
            .into_iter()
            .filter(|l| !harness.registry().contains(l))
            .collect()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    dataset_id: String,
    samples: Vec<ManifestSample>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    excluded: Vec<Exclusion>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestSample {
    sample_id: String,
    language: String,
    source_file: String,
    tests: Vec<ManifestTest>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestTest {
    in_file: String,
    out_file: String,
}

fn read_text(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|_| CorpusError::InvalidUtf8(path.to_path_buf()))
}

/// Loads `<root>/manifest.json` and every file it references. Samples come
/// back sorted by `sample_id`.
pub fn load_manifest(root: &Path) -> Result<Corpus, CorpusError> {
    let manifest_path = root.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(CorpusError::MissingManifest(manifest_path));
    }
    let text = read_text(&manifest_path)?;
    let manifest: ManifestFile = serde_json::from_str(&text).map_err(|e| CorpusError::MalformedManifest {
        path: manifest_path.clone(),
        message: e.to_string(),
    })?;

    let malformed = |message: String| CorpusError::MalformedManifest {
        path: manifest_path.clone(),
        message,
    };

    let mut seen = BTreeSet::new();
    let mut samples = Vec::with_capacity(manifest.samples.len());
    for entry in manifest.samples {
        if entry.sample_id.is_empty() {
            return Err(malformed("sample_id must be non-empty".into()));
        }
        if !seen.insert(entry.sample_id.clone()) {
            return Err(CorpusError::DuplicateSampleId(entry.sample_id));
        }
        let language = SubjectLanguage::new(&entry.language)
            .ok_or_else(|| malformed(format!("sample `{}`: language must be non-empty", entry.sample_id)))?;
        let source_text = read_text(&root.join(&entry.source_file))?;
        let tests = entry
            .tests
            .into_iter()
            .map(|t| {
                let input = read_text(&root.join(&t.in_file))?;
                let expected_output = read_text(&root.join(&t.out_file))?;
                Ok(TestCase {
                    truncated: is_truncated(&expected_output),
                    input,
                    expected_output,
                    in_file: t.in_file,
                    out_file: t.out_file,
                })
            })
            .collect::<Result<Vec<_>, CorpusError>>()?;
        samples.push(CodeSample {
            sample_id: entry.sample_id,
            language,
            source_text,
            tests,
            dataset_id: manifest.dataset_id.clone(),
            source_file: entry.source_file,
        });
    }
    samples.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    for ex in &manifest.excluded {
        if ex.reason.trim().is_empty() {
            return Err(malformed(format!("exclusion of `{}` has no reason", ex.sample_id)));
        }
        if seen.contains(&ex.sample_id) {
            return Err(malformed(format!("`{}` is both a sample and excluded", ex.sample_id)));
        }
    }

    Ok(Corpus {
        dataset_id: manifest.dataset_id,
        samples,
        excluded: manifest.excluded,
    })
}

/// Writes the corpus under `root` using each sample's recorded file paths.
pub fn write_corpus(corpus: &Corpus, root: &Path) -> Result<(), CorpusError> {
    let write = |rel: &str, contents: &str| -> Result<(), CorpusError> {
        let path = root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| CorpusError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, contents).map_err(|source| CorpusError::Io { path, source })
    };

    let mut manifest = ManifestFile {
        dataset_id: corpus.dataset_id.clone(),
        samples: Vec::with_capacity(corpus.samples.len()),
        excluded: corpus.excluded.clone(),
    };
    for sample in &corpus.samples {
        write(&sample.source_file, &sample.source_text)?;
        for test in &sample.tests {
            write(&test.in_file, &test.input)?;
            write(&test.out_file, &test.expected_output)?;
        }
        manifest.samples.push(ManifestSample {
            sample_id: sample.sample_id.clone(),
            language: sample.language.id().to_string(),
            source_file: sample.source_file.clone(),
            tests: sample
                .tests
                .iter()
                .map(|t| ManifestTest {
                    in_file: t.in_file.clone(),
                    out_file: t.out_file.clone(),
                })
                .collect(),
        });
    }
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(MANIFEST_FILE, &text)
}

/// Result of running the original program on one test input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    Output(String),
    TimedOut,
}

/// What running a sample's original source produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceRun {
    Uncompilable { diagnostics: String },
    Ran(Vec<Observation>),
}

/// Anything able to execute a sample's original program on its test inputs.
pub trait SourceRunner {
    fn run_source(&self, sample: &CodeSample) -> Result<SourceRun, CorpusError>;
}

impl SourceRunner for Harness {
    fn run_source(&self, sample: &CodeSample) -> Result<SourceRun, CorpusError> {
        let wrap = |source| CorpusError::Harness {
            sample_id: sample.sample_id.clone(),
            source,
        };
        let program = self.compile(&sample.source_text, &sample.language).map_err(wrap)?;
        if program.compile.status != CompileStatus::Ok {
            return Ok(SourceRun::Uncompilable {
                diagnostics: program.compile.diagnostics.clone(),
            });
        }
        let observations = sample
            .tests
            .iter()
            .map(|t| {
                let out = crate::harness::run_program(&program, t.input.as_bytes(), self.limits()).map_err(wrap)?;
                Ok(match out.exit {
                    crate::harness::ExitKind::TimedOut => Observation::TimedOut,
                    _ => Observation::Output(out.stdout_text()),
                })
            })
            .collect::<Result<Vec<_>, CorpusError>>()?;
        Ok(SourceRun::Ran(observations))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationVerdict {
    Exact,
    /// Truncated expected output whose prefix matches the actual output.
    PrefixRepairable,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCheck {
    pub verdict: ValidationVerdict,
    pub actual_output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ValidationStatus {
    Checked { tests: Vec<TestCheck> },
    SourceUncompilable { diagnostics: String },
    ExecutionTimeout { test_index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub sample_id: String,
    pub status: ValidationStatus,
}

impl ValidationReport {
    pub fn count(&self, verdict: ValidationVerdict) -> usize {
        match &self.status {
            ValidationStatus::Checked { tests } => tests.iter().filter(|t| t.verdict == verdict).count(),
            _ => 0,
        }
    }
}

/// Compares one expected output with what the original program printed.
pub fn check_test(test: &TestCase, actual: &str) -> ValidationVerdict {
    let actual_norm = normalize_output(actual);
    if normalize_output(&test.expected_output) == actual_norm {
        return ValidationVerdict::Exact;
    }
    match test.expected_prefix() {
        Some(prefix) if actual_norm.starts_with(&normalize_output(prefix)) => ValidationVerdict::PrefixRepairable,
        _ => ValidationVerdict::Mismatch,
    }
}

/// Runs the original source on every test input and grades each test.
pub fn validate_sample(sample: &CodeSample, runner: &dyn SourceRunner) -> Result<ValidationReport, CorpusError> {
    let status = match runner.run_source(sample)? {
        SourceRun::Uncompilable { diagnostics } => ValidationStatus::SourceUncompilable { diagnostics },
        SourceRun::Ran(observations) => {
            let mut tests = Vec::with_capacity(observations.len());
            let mut timeout = None;
            for (index, (test, obs)) in sample.tests.iter().zip(&observations).enumerate() {
                match obs {
                    Observation::TimedOut => {
                        timeout = Some(index);
                        break;
                    }
                    Observation::Output(actual) => tests.push(TestCheck {
                        verdict: check_test(test, actual),
                        actual_output: Some(actual.clone()),
                    }),
                }
            }
            match timeout {
                Some(test_index) => ValidationStatus::ExecutionTimeout { test_index },
                None => ValidationStatus::Checked { tests },
            }
        }
    };
    Ok(ValidationReport {
        sample_id: sample.sample_id.clone(),
        status,
    })
}

/// Applies validation reports: truncated outputs that prefix-match are
/// replaced with the recorded actual output, and samples with an unmatched
/// test (or an original program that does not build or finish) move to
/// `excluded`.
pub fn repair_corpus(corpus: &Corpus, reports: &[ValidationReport]) -> Result<Corpus, CorpusError> {
    let mut by_id: BTreeMap<&str, &ValidationReport> = BTreeMap::new();
    for report in reports {
        if corpus.sample(&report.sample_id).is_none() {
            return Err(CorpusError::ReportSampleMismatch(report.sample_id.clone()));
        }
        by_id.insert(&report.sample_id, report);
    }

    let mut samples = Vec::with_capacity(corpus.samples.len());
    let mut excluded = corpus.excluded.clone();
    for sample in &corpus.samples {
        let report = by_id
            .get(sample.sample_id.as_str())
            .ok_or_else(|| CorpusError::MissingReport(sample.sample_id.clone()))?;
        let exclude = |reason: &str| Exclusion {
            sample_id: sample.sample_id.clone(),
            reason: reason.to_string(),
        };
        match &report.status {
            ValidationStatus::SourceUncompilable { .. } => excluded.push(exclude(REASON_UNCOMPILABLE)),
            ValidationStatus::ExecutionTimeout { .. } => excluded.push(exclude(REASON_TIMEOUT)),
            ValidationStatus::Checked { tests } => {
                if tests.len() != sample.tests.len() || tests.iter().any(|t| t.verdict == ValidationVerdict::Mismatch) {
                    excluded.push(exclude(REASON_NO_VALID_TEST));
                    continue;
                }
                let mut repaired = sample.clone();
                for (test, check) in repaired.tests.iter_mut().zip(tests) {
                    if check.verdict == ValidationVerdict::PrefixRepairable {
                        test.expected_output = check.actual_output.clone().unwrap_or_default();
                        test.truncated = false;
                    }
                }
                samples.push(repaired);
            }
        }
    }
    excluded.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));
    Ok(Corpus {
        dataset_id: corpus.dataset_id.clone(),
        samples,
        excluded,
    })
}
