//! Prompt templates and extraction of code from model responses.
//!
//! Templates are plain text with `{name}` placeholders. The built-in set is
//! compiled in from `templates/`; a directory with files of the same names
//! overrides individual templates.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::SubjectLanguage;

pub const PLACEHOLDERS: [&str; 6] = [
    "source_code",
    "source_language",
    "target_language",
    "pseudocode_content",
    "target_code",
    "err_context",
];

pub const END_SENTINEL: &str = "End of Code";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("unbound placeholder `{0}`")]
    UnboundPlaceholder(String),
    #[error("template {template}: unknown placeholder `{name}`")]
    UnknownPlaceholder { template: TemplateId, name: String },
    #[error("template file {path}: {message}")]
    TemplateIo { path: String, message: String },
    #[error("nothing left after extracting code from the response")]
    EmptyExtraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    SpecGen,
    TranslateSpecOnly,
    TranslateSpecPlusSource,
    TranslateSourceOnly,
    RepairCompile,
}

impl TemplateId {
    pub const ALL: [TemplateId; 5] = [
        TemplateId::SpecGen,
        TemplateId::TranslateSpecOnly,
        TemplateId::TranslateSpecPlusSource,
        TemplateId::TranslateSourceOnly,
        TemplateId::RepairCompile,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            TemplateId::SpecGen => "spec_gen.txt",
            TemplateId::TranslateSpecOnly => "translate_spec_only.txt",
            TemplateId::TranslateSpecPlusSource => "translate_spec_plus_source.txt",
            TemplateId::TranslateSourceOnly => "translate_source_only.txt",
            TemplateId::RepairCompile => "repair_compile.txt",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            TemplateId::SpecGen => include_str!("../templates/spec_gen.txt"),
            TemplateId::TranslateSpecOnly => include_str!("../templates/translate_spec_only.txt"),
            TemplateId::TranslateSpecPlusSource => {
                include_str!("../templates/translate_spec_plus_source.txt")
            }
            TemplateId::TranslateSourceOnly => include_str!("../templates/translate_source_only.txt"),
            TemplateId::RepairCompile => include_str!("../templates/repair_compile.txt"),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name().trim_end_matches(".txt"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z_]+)\}").unwrap())
}

/// A parsed template body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: String,
    pieces: Vec<Piece>,
}

impl PromptTemplate {
    pub fn parse(id: TemplateId, body: impl Into<String>) -> Result<Self, PromptError> {
        let body = body.into();
        let mut pieces = Vec::new();
        let mut last = 0;
        for caps in placeholder_re().captures_iter(&body) {
            let whole = caps.get(0).unwrap();
            let name = &caps[1];
            if !PLACEHOLDERS.contains(&name) {
                return Err(PromptError::UnknownPlaceholder {
                    template: id,
                    name: name.to_string(),
                });
            }
            if whole.start() > last {
                pieces.push(Piece::Text(body[last..whole.start()].to_string()));
            }
            pieces.push(Piece::Slot(name.to_string()));
            last = whole.end();
        }
        if last < body.len() {
            pieces.push(Piece::Text(body[last..].to_string()));
        }
        Ok(Self { id, body, pieces })
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for piece in &self.pieces {
            if let Piece::Slot(name) = piece {
                if !seen.contains(&name.as_str()) {
                    seen.push(name.as_str());
                }
            }
        }
        seen
    }

    /// Single-pass substitution: bound values are never re-scanned, so code
    /// containing `{...}` passes through untouched.
    pub fn render(&self, bindings: &Bindings) -> Result<String, PromptError> {
        let mut out = String::with_capacity(self.body.len());
        for piece in &self.pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(name) => {
                    let value = bindings
                        .get(name)
                        .ok_or_else(|| PromptError::UnboundPlaceholder(name.clone()))?;
                    out.push_str(value);
                }
            }
        }
        Ok(out)
    }
}

/// Placeholder values for one rendering.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings(BTreeMap<String, String>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<String>) -> Self {
        self.0.insert(name.to_string(), value.into());
        self
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: BTreeMap<TemplateId, PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let templates = TemplateId::ALL
            .iter()
            .map(|&id| {
                (
                    id,
                    PromptTemplate::parse(id, id.builtin()).expect("built-in template parses"),
                )
            })
            .collect();
        Self { templates }
    }

    /// Built-ins overridden by any `<name>.txt` present in `dir`. One
    /// trailing newline is dropped so editor-saved files render the same.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        if !dir.is_dir() {
            return Err(PromptError::TemplateIo {
                path: dir.display().to_string(),
                message: "not a directory".into(),
            });
        }
        let mut set = Self::builtin();
        for id in TemplateId::ALL {
            let path = dir.join(id.file_name());
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    let text = text.strip_suffix('\n').unwrap_or(&text);
                    let text = text.strip_suffix('\r').unwrap_or(text);
                    set.templates.insert(id, PromptTemplate::parse(id, text)?);
                }
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(e) => {
                    return Err(PromptError::TemplateIo {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })
                }
            }
        }
        Ok(set)
    }

    pub fn get(&self, id: TemplateId) -> &PromptTemplate {
        &self.templates[&id]
    }

    pub fn render(&self, id: TemplateId, bindings: &Bindings) -> Result<String, PromptError> {
        self.get(id).render(bindings)
    }
}

/// Renders a built-in template.
pub fn render(id: TemplateId, bindings: &Bindings) -> Result<String, PromptError> {
    static BUILTIN: OnceLock<TemplateSet> = OnceLock::new();
    BUILTIN.get_or_init(TemplateSet::builtin).render(id, bindings)
}

/// Model-written pseudocode for one sample, stored verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specification {
    pub sample_id: String,
    pub text: String,
    pub source_language: SubjectLanguage,
    pub request_digest: String,
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

/// Concatenated bodies of all fenced blocks, or `None` without fences. An
/// unterminated fence runs to the end of the text.
fn fenced_bodies(raw: &str) -> Option<String> {
    let mut inside = false;
    let mut found = false;
    let mut body: Vec<&str> = Vec::new();
    for line in raw.lines() {
        if is_fence(line) {
            found = true;
            inside = !inside;
            continue;
        }
        if inside {
            body.push(line);
        }
    }
    found.then(|| body.join("\n"))
}

fn sentinel_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?://|#|--|/\*)\s*["'`]?\s*End of Code|^\s*["'`]?End of Code["'`.]?\s*$"#).unwrap())
}

/// Cuts from the first sentinel onward; code before it on the same line
/// survives.
fn cut_sentinel(text: &str) -> &str {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if let Some(m) = sentinel_re().find(line.trim_end_matches(['\n', '\r'])) {
            return &text[..offset + m.start()];
        }
        offset += line.len();
    }
    text
}

fn tidy(text: &str) -> &str {
    let mut start = 0;
    for line in text.split_inclusive('\n') {
        if line.trim().is_empty() {
            start += line.len();
        } else {
            break;
        }
    }
    text[start..].trim_end()
}

/// Pulls the program text out of a model response.
///
/// Fenced blocks, when present, are the only content kept. Everything from
/// the "End of Code" comment onward is dropped, in any of the comment styles
/// models tend to use. Leading blank lines and trailing whitespace go.
pub fn extract_code(raw: &str, target: &SubjectLanguage) -> Result<String, PromptError> {
    let _ = target;
    let fenced = fenced_bodies(raw);
    let text = fenced.as_deref().unwrap_or(raw);
    let code = tidy(cut_sentinel(text));
    if code.is_empty() {
        return Err(PromptError::EmptyExtraction);
    }
    Ok(code.to_string())
}

/// Pseudocode answers are kept verbatim apart from outer whitespace.
pub fn extract_specification(raw: &str) -> Result<String, PromptError> {
    let text = raw.trim();
    if text.is_empty() {
        return Err(PromptError::EmptyExtraction);
    }
    Ok(text.to_string())
}
