//! Compile and run subject-language programs against stdin/stdout tests.
//!
//! Every compilation gets its own temporary sandbox directory. Commands run
//! with the sandbox as working directory and relative file names, and the
//! sandbox path is scrubbed from diagnostics, so compiler messages are
//! reproducible across runs (they end up inside repair prompts, whose
//! digests key the replay fixtures).

mod outcome;
pub mod process;
mod toolchain;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use tempfile::TempDir;
use thiserror::Error;

pub use outcome::{classify, normalize_output, overall_outcome, Outcome, TestExecution, TestRunResult, TestVerdict};
pub use process::{ExitKind, StdinMode};
pub use toolchain::{probe_version, EntryConvention, ToolchainProfile, ToolchainRegistry};

use crate::corpus::TestCase;
use crate::language::SubjectLanguage;
use process::{run_process, ProcessSpec};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no toolchain registered for language `{0}`")]
    UnknownLanguage(String),
    #[error("toolchain registry {path}: {message}")]
    Registry { path: String, message: String },
    #[error("sandbox setup failed: {0}")]
    SandboxSetup(#[source] std::io::Error),
    #[error("sandbox failure: {0}")]
    Sandbox(#[source] std::io::Error),
    #[error("no test cases to run")]
    NoTests,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompileStatus {
    Ok,
    Error,
    /// The compiler or interpreter could not be found: an environment
    /// problem, not a property of the program.
    ToolMissing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileResult {
    pub status: CompileStatus,
    pub diagnostics: String,
    pub artifact: Option<PathBuf>,
    pub elapsed: Duration,
}

/// Wall-clock, memory and stdin policy for executions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecLimits {
    #[serde(with = "duration_secs")]
    pub compile_deadline: Duration,
    #[serde(with = "duration_secs")]
    pub wall_deadline: Duration,
    pub memory_cap: Option<u64>,
    pub stdin_mode: StdinMode,
    /// Stop at the first non-passing test.
    pub fail_fast: bool,
}

impl Default for ExecLimits {
    fn default() -> Self {
        Self {
            compile_deadline: Duration::from_secs(120),
            wall_deadline: Duration::from_secs(10),
            memory_cap: Some(512 << 20),
            stdin_mode: StdinMode::HoldOpen,
            fail_fast: false,
        }
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

/// A private working directory, removed on drop.
#[derive(Debug)]
pub struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    pub fn new() -> Result<Self, HarnessError> {
        let dir = tempfile::Builder::new()
            .prefix("bench-sbx-")
            .tempdir()
            .map_err(HarnessError::SandboxSetup)?;
        Ok(Self { dir })
    }

    pub fn path(&self) -> &Path {
        self.dir.path()
    }
}

/// Resolved file names for one program inside a sandbox.
#[derive(Debug, Clone, PartialEq, Eq)]
struct EntryNames {
    /// Stem of the source file (`{entry}`).
    file_stem: String,
    /// Class or unit to launch (`{main}`).
    main: String,
}

fn java_entry_names(code: &str) -> EntryNames {
    static PUBLIC_TYPE: OnceLock<Regex> = OnceLock::new();
    static MAIN_METHOD: OnceLock<Regex> = OnceLock::new();
    static CLASS_DECL: OnceLock<Regex> = OnceLock::new();
    let public_type = PUBLIC_TYPE.get_or_init(|| {
        Regex::new(
            r"(?m)^\s*public\s+(?:(?:final|abstract|strictfp)\s+)*(?:class|interface|enum|record)\s+([A-Za-z_$][\w$]*)",
        )
        .unwrap()
    });
    let main_method = MAIN_METHOD.get_or_init(|| Regex::new(r"static\s+(?:final\s+)?void\s+main\s*\(").unwrap());
    let class_decl = CLASS_DECL.get_or_init(|| Regex::new(r"\b(?:class|enum|record)\s+([A-Za-z_$][\w$]*)").unwrap());

    let file_stem = public_type
        .captures(code)
        .map(|c| c[1].to_string())
        .unwrap_or_else(|| "Main".to_string());
    let main = main_method
        .find(code)
        .and_then(|m| {
            // innermost class whose body encloses the main method
            class_decl
                .captures_iter(code)
                .filter_map(|c| {
                    let decl = c.get(0).unwrap();
                    let open = decl.end() + code[decl.end()..].find('{')?;
                    let close = matching_brace(code, open)?;
                    (open < m.start() && m.start() < close).then(|| (open, c[1].to_string()))
                })
                .max_by_key(|(open, _)| *open)
                .map(|(_, name)| name)
        })
        .unwrap_or_else(|| file_stem.clone());
    EntryNames { file_stem, main }
}

/// Index of the `}` closing the `{` at `open`, skipping comments and
/// string/char literals.
fn matching_brace(code: &str, open: usize) -> Option<usize> {
    let bytes = code.as_bytes();
    let mut depth = 0usize;
    let mut i = open;
    while i < bytes.len() {
        match bytes[i] {
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                i += code[i..].find('\n').unwrap_or(code.len() - i);
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                i += 2 + code[i + 2..].find("*/").map(|p| p + 1).unwrap_or(code.len() - i - 2);
            }
            quote @ (b'"' | b'\'') => {
                i += 1;
                while i < bytes.len() && bytes[i] != quote && bytes[i] != b'\n' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
            }
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

fn entry_names(profile: &ToolchainProfile, code: &str) -> EntryNames {
    match profile.entry {
        EntryConvention::Fixed => {
            let stem = Path::new(&profile.source_file)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            EntryNames {
                file_stem: stem.clone(),
                main: stem,
            }
        }
        EntryConvention::JavaMainClass => java_entry_names(code),
    }
}

fn expand(template: &str, source: &str, artifact: &str, names: &EntryNames) -> String {
    template
        .replace("{source}", source)
        .replace("{artifact}", artifact)
        .replace("{entry}", &names.file_stem)
        .replace("{main}", &names.main)
}

/// Replaces sandbox paths and compiler temp-file names with stable tokens.
fn scrub_diagnostics(text: &str, sandbox: &Path) -> String {
    static TEMP_OBJECT: OnceLock<Regex> = OnceLock::new();
    let mut out = text.to_string();
    let mut roots = vec![sandbox.to_path_buf()];
    if let Ok(canon) = sandbox.canonicalize() {
        roots.push(canon);
    }
    for root in roots {
        let root = root.display().to_string();
        out = out.replace(&format!("{root}/"), "").replace(&root, ".");
    }
    let temp_object = TEMP_OBJECT.get_or_init(|| Regex::new(r"(?:/[\w.\-]+)*/cc[A-Za-z0-9]{6}\.(o|s)\b").unwrap());
    temp_object.replace_all(&out, "<tmp>.$1").into_owned()
}

/// A program written into its sandbox, with the outcome of the build step.
#[derive(Debug)]
pub struct PreparedProgram {
    pub language: SubjectLanguage,
    pub compile: CompileResult,
    run_argv: Vec<String>,
    env: BTreeMap<String, String>,
    sandbox: Sandbox,
}

impl PreparedProgram {
    pub fn sandbox_path(&self) -> &Path {
        self.sandbox.path()
    }

    pub fn run_argv(&self) -> &[String] {
        &self.run_argv
    }
}

/// Writes `code` into `sandbox` following the profile's layout and runs the
/// compile (or syntax check) step.
pub fn compile(
    code: &str,
    language: &SubjectLanguage,
    profile: &ToolchainProfile,
    sandbox: Sandbox,
    deadline: Duration,
) -> Result<PreparedProgram, HarnessError> {
    let names = entry_names(profile, code);
    let source = expand(&profile.source_file, "", "", &names);
    let artifact_name = profile
        .artifact
        .as_deref()
        .map(|a| expand(a, &source, "", &names))
        .unwrap_or_default();
    let source_path = sandbox.path().join(&source);
    std::fs::write(&source_path, code).map_err(HarnessError::SandboxSetup)?;

    let run_argv: Vec<String> = profile
        .run_cmd
        .iter()
        .map(|a| expand(a, &source, &artifact_name, &names))
        .collect();

    let build_cmd = profile.compile_cmd.as_ref().or(profile.check_cmd.as_ref());
    let start = Instant::now();
    let mut result = CompileResult {
        status: CompileStatus::Ok,
        diagnostics: String::new(),
        artifact: None,
        elapsed: Duration::ZERO,
    };

    if let Some(cmd) = build_cmd {
        let spec = ProcessSpec {
            argv: cmd.iter().map(|a| expand(a, &source, &artifact_name, &names)).collect(),
            cwd: sandbox.path().to_path_buf(),
            env: profile.env.clone(),
            stdin: Vec::new(),
            stdin_mode: StdinMode::Close,
            deadline,
            memory_cap: None,
        };
        match run_process(&spec) {
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                result.status = CompileStatus::ToolMissing;
                result.diagnostics = format!("`{}` not found", spec.argv[0]);
            }
            Err(e) => return Err(HarnessError::Sandbox(e)),
            Ok(out) => {
                let mut diagnostics = out.stdout_text();
                diagnostics.push_str(&out.stderr_text());
                let diagnostics = scrub_diagnostics(&diagnostics, sandbox.path());
                match out.exit {
                    ExitKind::Exited(0) => result.diagnostics = diagnostics,
                    ExitKind::TimedOut => {
                        result.status = CompileStatus::Error;
                        result.diagnostics =
                            format!("{diagnostics}compilation timed out after {}s", deadline.as_secs_f64());
                    }
                    other => {
                        result.status = CompileStatus::Error;
                        result.diagnostics = if diagnostics.trim().is_empty() {
                            format!("{} failed: {other:?}", spec.argv[0])
                        } else {
                            diagnostics
                        };
                    }
                }
            }
        }
    }
    result.elapsed = start.elapsed();

    if result.status == CompileStatus::Ok {
        let artifact = if profile.is_interpreted() {
            source_path
        } else {
            sandbox.path().join(&artifact_name)
        };
        if artifact.exists() {
            result.artifact = Some(artifact);
        } else {
            result.status = CompileStatus::Error;
            result
                .diagnostics
                .push_str(&format!("compiler produced no `{artifact_name}`"));
        }
    }

    Ok(PreparedProgram {
        language: language.clone(),
        compile: result,
        run_argv,
        env: profile.env.clone(),
        sandbox,
    })
}

/// Executes a compiled program once per test case.
pub fn run_tests(
    program: &PreparedProgram,
    tests: &[TestCase],
    limits: &ExecLimits,
) -> Result<TestRunResult, HarnessError> {
    if tests.is_empty() {
        return Err(HarnessError::NoTests);
    }
    let mut per_test = Vec::with_capacity(tests.len());
    for test in tests {
        let out = run_program(program, test.input.as_bytes(), limits)?;
        let actual_output = out.stdout_text();
        let verdict = match out.exit {
            ExitKind::TimedOut => TestVerdict::Timeout,
            ExitKind::Exited(0) => {
                if normalize_output(&actual_output) == normalize_output(&test.expected_output) {
                    TestVerdict::Pass
                } else {
                    TestVerdict::Mismatch
                }
            }
            _ => TestVerdict::RuntimeError,
        };
        per_test.push(TestExecution {
            verdict,
            actual_output,
            elapsed: out.elapsed,
        });
        if limits.fail_fast && verdict != TestVerdict::Pass {
            break;
        }
    }
    Ok(TestRunResult::from_tests(per_test))
}

/// One raw execution of a prepared program.
pub fn run_program(
    program: &PreparedProgram,
    stdin: &[u8],
    limits: &ExecLimits,
) -> Result<process::ProcessOutput, HarnessError> {
    let spec = ProcessSpec {
        argv: program.run_argv.clone(),
        cwd: program.sandbox.path().to_path_buf(),
        env: program.env.clone(),
        stdin: stdin.to_vec(),
        stdin_mode: limits.stdin_mode,
        deadline: limits.wall_deadline,
        memory_cap: limits.memory_cap,
    };
    run_process(&spec).map_err(HarnessError::Sandbox)
}

/// Registry plus limits: the execution capability handed to the pipeline.
#[derive(Debug, Clone)]
pub struct Harness {
    registry: ToolchainRegistry,
    limits: ExecLimits,
}

impl Harness {
    pub fn new(registry: ToolchainRegistry, limits: ExecLimits) -> Self {
        Self { registry, limits }
    }

    pub fn registry(&self) -> &ToolchainRegistry {
        &self.registry
    }

    pub fn limits(&self) -> &ExecLimits {
        &self.limits
    }

    pub fn compile(&self, code: &str, language: &SubjectLanguage) -> Result<PreparedProgram, HarnessError> {
        let profile = self.registry.profile(language)?;
        compile(code, language, profile, Sandbox::new()?, self.limits.compile_deadline)
    }

    pub fn run_tests(&self, program: &PreparedProgram, tests: &[TestCase]) -> Result<TestRunResult, HarnessError> {
        run_tests(program, tests, &self.limits)
    }

    /// Compile, then run when the build succeeded.
    pub fn evaluate(
        &self,
        code: &str,
        language: &SubjectLanguage,
        tests: &[TestCase],
    ) -> Result<(CompileResult, Option<TestRunResult>, Outcome), HarnessError> {
        let program = self.compile(code, language)?;
        let run = match program.compile.status {
            CompileStatus::Ok => Some(self.run_tests(&program, tests)?),
            _ => None,
        };
        let outcome = classify(&program.compile, run.as_ref());
        Ok((program.compile, run, outcome))
    }
}
