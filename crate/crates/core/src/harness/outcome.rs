use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::CompileResult;
use super::CompileStatus;

/// Verdict of one evaluated attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    CompilationError,
    TestMismatch,
    RuntimeError,
    /// Infinite loop, or blocked waiting for input.
    Timeout,
}

impl Outcome {
    pub const ALL: [Outcome; 5] = [
        Outcome::Success,
        Outcome::CompilationError,
        Outcome::TestMismatch,
        Outcome::RuntimeError,
        Outcome::Timeout,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::CompilationError => "compilation_error",
            Outcome::TestMismatch => "test_mismatch",
            Outcome::RuntimeError => "runtime_error",
            Outcome::Timeout => "timeout",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-test verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestVerdict {
    Pass,
    Mismatch,
    RuntimeError,
    Timeout,
}

impl TestVerdict {
    pub fn outcome(self) -> Outcome {
        match self {
            TestVerdict::Pass => Outcome::Success,
            TestVerdict::Mismatch => Outcome::TestMismatch,
            TestVerdict::RuntimeError => Outcome::RuntimeError,
            TestVerdict::Timeout => Outcome::Timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestExecution {
    pub verdict: TestVerdict,
    pub actual_output: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestRunResult {
    pub per_test: Vec<TestExecution>,
    pub overall: Outcome,
}

impl TestRunResult {
    pub fn from_tests(per_test: Vec<TestExecution>) -> Self {
        let overall = overall_outcome(per_test.iter().map(|t| t.verdict));
        Self { per_test, overall }
    }

    pub fn verdicts(&self) -> Vec<TestVerdict> {
        self.per_test.iter().map(|t| t.verdict).collect()
    }
}

/// The first failing test in corpus order decides the category.
pub fn overall_outcome(verdicts: impl IntoIterator<Item = TestVerdict>) -> Outcome {
    verdicts
        .into_iter()
        .find(|v| *v != TestVerdict::Pass)
        .map(TestVerdict::outcome)
        .unwrap_or(Outcome::Success)
}

/// Unifies line endings to `\n`, trims trailing whitespace on each line and
/// trims the text as a whole. Leading whitespace of inner lines is kept.
pub fn normalize_output(text: &str) -> String {
    let unified = text.replace("\r\n", "\n").replace('\r', "\n");
    let lines: Vec<&str> = unified.split('\n').map(str::trim_end).collect();
    lines.join("\n").trim().to_string()
}

pub fn classify(compile: &CompileResult, run: Option<&TestRunResult>) -> Outcome {
    match compile.status {
        CompileStatus::Error | CompileStatus::ToolMissing => Outcome::CompilationError,
        CompileStatus::Ok => match run {
            Some(run) => run.overall,
            // nothing was executed; treat as not runnable
            None => Outcome::CompilationError,
        },
    }
}
