//! Toolchain registry: how each subject language is compiled, checked and run.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::process::{run_process, ProcessSpec, StdinMode};
use super::HarnessError;
use crate::language::SubjectLanguage;

/// How the source file and run target are named inside the sandbox.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryConvention {
    /// The program always lives in `source_file`.
    #[default]
    Fixed,
    /// The file is named after the public top-level class (or `Main`), and
    /// the run target is the class declaring `main`.
    JavaMainClass,
}

/// One registry entry. Argument templates may use `{source}`, `{artifact}`,
/// `{entry}` (source file stem) and `{main}` (launch target). Commands run
/// with the sandbox as working directory so diagnostics only mention
/// relative paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolchainProfile {
    pub source_file: String,
    #[serde(default)]
    pub compile_cmd: Option<Vec<String>>,
    /// Syntax pre-check for interpreted languages.
    #[serde(default)]
    pub check_cmd: Option<Vec<String>>,
    pub run_cmd: Vec<String>,
    pub version_probe: Vec<String>,
    #[serde(default)]
    pub artifact: Option<String>,
    #[serde(default)]
    pub entry: EntryConvention,
    #[serde(default)]
    pub env: BTreeMap<String, String>,
}

impl ToolchainProfile {
    pub fn is_interpreted(&self) -> bool {
        self.compile_cmd.is_none()
    }
}

fn argv(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

/// Language id → profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToolchainRegistry {
    profiles: BTreeMap<SubjectLanguage, ToolchainProfile>,
}

impl Default for ToolchainRegistry {
    /// gcc/g++ with the host libc, Go, a JDK and CPython 3.
    fn default() -> Self {
        let mut profiles = BTreeMap::new();
        let lang = |id: &str| SubjectLanguage::new(id).expect("static id");

        profiles.insert(
            lang("c"),
            ToolchainProfile {
                source_file: "main.c".into(),
                compile_cmd: Some(argv(&[
                    "gcc",
                    "-O2",
                    "-std=gnu11",
                    "-o",
                    "{artifact}",
                    "{source}",
                    "-lm",
                ])),
                check_cmd: None,
                run_cmd: argv(&["./{artifact}"]),
                version_probe: argv(&["gcc", "--version"]),
                artifact: Some("main".into()),
                entry: EntryConvention::Fixed,
                env: BTreeMap::new(),
            },
        );
        profiles.insert(
            lang("cpp"),
            ToolchainProfile {
                source_file: "main.cpp".into(),
                compile_cmd: Some(argv(&["g++", "-O2", "-std=gnu++17", "-o", "{artifact}", "{source}"])),
                check_cmd: None,
                run_cmd: argv(&["./{artifact}"]),
                version_probe: argv(&["g++", "--version"]),
                artifact: Some("main".into()),
                entry: EntryConvention::Fixed,
                env: BTreeMap::new(),
            },
        );
        profiles.insert(
            lang("go"),
            ToolchainProfile {
                source_file: "main.go".into(),
                compile_cmd: Some(argv(&["go", "build", "-o", "{artifact}", "{source}"])),
                check_cmd: None,
                run_cmd: argv(&["./{artifact}"]),
                version_probe: argv(&["go", "version"]),
                artifact: Some("main".into()),
                entry: EntryConvention::Fixed,
                env: BTreeMap::from([("GO111MODULE".to_string(), "off".to_string())]),
            },
        );
        profiles.insert(
            lang("java"),
            ToolchainProfile {
                source_file: "{entry}.java".into(),
                compile_cmd: Some(argv(&["javac", "-encoding", "UTF-8", "-d", ".", "{source}"])),
                check_cmd: None,
                run_cmd: argv(&[
                    "java",
                    "-Xss16m",
                    "-XX:+UseSerialGC",
                    "-XX:TieredStopAtLevel=1",
                    "-cp",
                    ".",
                    "{main}",
                ]),
                version_probe: argv(&["java", "-version"]),
                artifact: Some("{main}.class".into()),
                entry: EntryConvention::JavaMainClass,
                env: BTreeMap::new(),
            },
        );
        profiles.insert(
            lang("python"),
            ToolchainProfile {
                source_file: "main.py".into(),
                compile_cmd: None,
                check_cmd: Some(argv(&["python3", "-m", "py_compile", "{source}"])),
                run_cmd: argv(&["python3", "{source}"]),
                version_probe: argv(&["python3", "--version"]),
                artifact: None,
                entry: EntryConvention::Fixed,
                env: BTreeMap::from([("PYTHONDONTWRITEBYTECODE".to_string(), "1".to_string())]),
            },
        );
        Self { profiles }
    }
}

impl ToolchainRegistry {
    pub fn empty() -> Self {
        Self {
            profiles: BTreeMap::new(),
        }
    }

    /// Reads a `toolchains.json` file: language id → profile.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Registry {
            path: path.display().to_string(),
            message: source.to_string(),
        })?;
        Self::from_json(&text).map_err(|message| HarnessError::Registry {
            path: path.display().to_string(),
            message,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }

    pub fn insert(&mut self, language: SubjectLanguage, profile: ToolchainProfile) {
        self.profiles.insert(language, profile);
    }

    pub fn get(&self, language: &SubjectLanguage) -> Option<&ToolchainProfile> {
        self.profiles.get(language)
    }

    pub fn profile(&self, language: &SubjectLanguage) -> Result<&ToolchainProfile, HarnessError> {
        self.get(language)
            .ok_or_else(|| HarnessError::UnknownLanguage(language.id().to_string()))
    }

    pub fn contains(&self, language: &SubjectLanguage) -> bool {
        self.profiles.contains_key(language)
    }

    pub fn languages(&self) -> impl Iterator<Item = &SubjectLanguage> {
        self.profiles.keys()
    }

    /// Runs every version probe; `Err` carries the reason a toolchain is
    /// unusable.
    pub fn probe_versions(&self) -> Vec<(SubjectLanguage, Result<String, String>)> {
        self.profiles
            .iter()
            .map(|(lang, profile)| (lang.clone(), probe_version(profile)))
            .collect()
    }
}

/// First non-empty line the probe prints, from stdout or stderr.
pub fn probe_version(profile: &ToolchainProfile) -> Result<String, String> {
    let spec = ProcessSpec {
        argv: profile.version_probe.clone(),
        cwd: std::env::temp_dir(),
        env: profile.env.clone(),
        stdin: Vec::new(),
        stdin_mode: StdinMode::Close,
        deadline: Duration::from_secs(30),
        memory_cap: None,
    };
    let out = run_process(&spec).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => format!("{} not found", profile.version_probe.join(" ")),
        _ => e.to_string(),
    })?;
    if !out.exit.success() {
        return Err(format!(
            "{} exited with {:?}",
            profile.version_probe.join(" "),
            out.exit
        ));
    }
    let text = format!("{}\n{}", out.stdout_text(), out.stderr_text());
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .map(str::to_string)
        .ok_or_else(|| "version probe printed nothing".to_string())
}
