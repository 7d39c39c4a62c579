//! Code-quality accounting for translated programs: NCLOC, Blocker/Critical
//! issue ingestion from analyzer exports, densities and message rankings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::language::CommentSyntax;
use crate::metrics::UNDEFINED;
use crate::pipeline::{Phase, TranslationAttempt};
use crate::SubjectLanguage;

pub const DENSITY_CSV_HEADER: &str = "dataset,source,target,approach,phase,files,issues,ncloc,density";
pub const DISTRIBUTION_CSV_HEADER: &str = "dataset,method,file,density";

#[derive(Debug, Error)]
pub enum QualityError {
    #[error("malformed issue export: {0}")]
    MalformedExport(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scan {
    Code,
    Block,
    Str(char),
    Triple(char),
    Raw,
}

/// Per-line flag: does the line carry a token outside comments? String
/// contents count as code, so docstrings and text blocks are code lines.
pub fn code_lines(code: &str, syntax: CommentSyntax) -> Vec<bool> {
    let mut state = Scan::Code;
    let mut flags = Vec::new();
    for line in code.lines() {
        let chars: Vec<char> = line.chars().collect();
        let mut has_code = matches!(state, Scan::Str(_) | Scan::Triple(_) | Scan::Raw) && !line.trim().is_empty();
        let at = |i: usize, s: &str| s.chars().enumerate().all(|(k, c)| chars.get(i + k) == Some(&c));
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            match state {
                Scan::Code => {
                    if at(i, syntax.line) {
                        break;
                    }
                    if let Some((open, _)) = syntax.block {
                        if at(i, open) {
                            state = Scan::Block;
                            i += open.chars().count();
                            continue;
                        }
                    }
                    if c.is_whitespace() {
                        i += 1;
                        continue;
                    }
                    has_code = true;
                    if syntax.triple_quoted_strings && (c == '"' || c == '\'') && at(i, &c.to_string().repeat(3)) {
                        state = Scan::Triple(c);
                        i += 3;
                        continue;
                    }
                    if c == '"' || c == '\'' {
                        state = Scan::Str(c);
                    } else if c == '`' && syntax.raw_backtick_strings {
                        state = Scan::Raw;
                    }
                    i += 1;
                }
                Scan::Block => {
                    let close = syntax.block.map(|(_, e)| e).unwrap_or("*/");
                    if at(i, close) {
                        state = Scan::Code;
                        i += close.chars().count();
                    } else {
                        i += 1;
                    }
                }
                Scan::Str(q) => {
                    if c == '\\' {
                        i += 2;
                        continue;
                    }
                    if c == q {
                        state = Scan::Code;
                    }
                    i += 1;
                }
                Scan::Triple(q) => {
                    if c == '\\' {
                        i += 2;
                        continue;
                    }
                    if at(i, &q.to_string().repeat(3)) {
                        state = Scan::Code;
                        i += 3;
                    } else {
                        i += 1;
                    }
                }
                Scan::Raw => {
                    if c == '`' {
                        state = Scan::Code;
                    }
                    i += 1;
                }
            }
        }
        // ordinary string literals do not span lines (a trailing backslash
        // continuation is rare enough to ignore)
        if let Scan::Str(_) = state {
            state = Scan::Code;
        }
        flags.push(has_code);
    }
    flags
}

pub fn count_ncloc(code: &str, language: &SubjectLanguage) -> usize {
    code_lines(code, language.comment_syntax())
        .into_iter()
        .filter(|&b| b)
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Blocker,
    Critical,
    Other,
}

impl Severity {
    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_uppercase().as_str() {
            "BLOCKER" => Severity::Blocker,
            "CRITICAL" => Severity::Critical,
            _ => Severity::Other,
        }
    }

    pub fn is_headline(self) -> bool {
        self != Severity::Other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub rule_id: String,
    pub severity: Severity,
    pub message: String,
    pub file: String,
    pub language: Option<SubjectLanguage>,
}

#[derive(Deserialize)]
struct RawIssue {
    rule: String,
    severity: String,
    message: String,
    component: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Export {
    Minimal(Vec<RawIssue>),
    Analyzer { issues: Vec<RawIssue> },
}

/// Parses either a bare array of `{rule, severity, message, component}` or
/// an analyzer export object with an `issues` array, whose components are
/// prefixed with `<project>:`.
pub fn ingest_issues(text: &str) -> Result<Vec<Issue>, QualityError> {
    let export: Export = serde_json::from_str(text).map_err(|e| QualityError::MalformedExport(e.to_string()))?;
    let raw = match export {
        Export::Minimal(v) => v,
        Export::Analyzer { issues } => issues,
    };
    Ok(raw
        .into_iter()
        .map(|r| {
            let file = match r.component.split_once(':') {
                Some((_, path)) => path.to_string(),
                None => r.component,
            };
            let language = std::path::Path::new(&file)
                .extension()
                .and_then(|e| e.to_str())
                .and_then(SubjectLanguage::from_extension);
            Issue {
                rule_id: r.rule,
                severity: Severity::parse(&r.severity),
                message: r.message,
                file,
                language,
            }
        })
        .collect())
}

/// A successfully built translation, laid out for analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledFile {
    pub path: String,
    pub dataset: String,
    pub source: SubjectLanguage,
    pub target: SubjectLanguage,
    pub approach: crate::pipeline::Approach,
    pub phase: Phase,
    pub code: String,
}

/// `{approach}/{phase}/{dataset}/{source}_to_{target}/{sample_id}.{ext}`
pub fn compiled_file_path(attempt: &TranslationAttempt, phase: Phase) -> String {
    format!(
        "{}/{}/{}/{}_to_{}/{}.{}",
        attempt.approach.as_str().replace('+', "_"),
        phase,
        attempt.dataset_id,
        attempt.source_language,
        attempt.target_language,
        attempt.sample_id,
        attempt.target_language.file_extension()
    )
}

/// Pre-repair code counts when it built without repair; post-repair code
/// counts when the final code built.
pub fn compiled_files(attempts: &[TranslationAttempt]) -> BTreeMap<String, CompiledFile> {
    let mut out = BTreeMap::new();
    for a in attempts.iter().filter(|a| a.compiled) {
        for phase in Phase::ALL {
            let code = match phase {
                Phase::PreRepair if a.repair.is_some() => continue,
                Phase::PreRepair => &a.candidate_code,
                Phase::PostRepair => &a.final_code,
            };
            let path = compiled_file_path(a, phase);
            out.insert(
                path.clone(),
                CompiledFile {
                    path,
                    dataset: a.dataset_id.clone(),
                    source: a.source_language.clone(),
                    target: a.target_language.clone(),
                    approach: a.approach,
                    phase,
                    code: code.clone(),
                },
            );
        }
    }
    out
}

/// Keeps headline issues on files of successfully compiled code.
pub fn headline_issues(issues: &[Issue], compiled: &BTreeSet<String>) -> Vec<Issue> {
    issues
        .iter()
        .filter(|i| i.severity.is_headline() && compiled.contains(&i.file))
        .cloned()
        .collect()
}

pub fn density(issue_count: usize, ncloc: usize) -> Option<f64> {
    (ncloc > 0).then(|| 1000.0 * issue_count as f64 / ncloc as f64)
}

pub fn format_density(d: Option<f64>) -> String {
    d.map(|d| format!("{d:.2}")).unwrap_or_else(|| UNDEFINED.to_string())
}

/// Exact-text grouping over headline issues, by share descending then
/// message ascending.
pub fn top_messages(issues: &[Issue], k: usize) -> Vec<(String, f64)> {
    let headline: Vec<&Issue> = issues.iter().filter(|i| i.severity.is_headline()).collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for i in &headline {
        *counts.entry(i.message.as_str()).or_default() += 1;
    }
    let total = headline.len() as f64;
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(k)
        .map(|(m, n)| (m.to_string(), n as f64 / total))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QualityKey {
    pub dataset: String,
    pub source: SubjectLanguage,
    pub target: SubjectLanguage,
    pub approach: crate::pipeline::Approach,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityCell {
    pub files: usize,
    pub issue_count: usize,
    pub ncloc: usize,
}

impl QualityCell {
    pub fn density(&self) -> Option<f64> {
        density(self.issue_count, self.ncloc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileDensity {
    pub dataset: String,
    pub method: String,
    pub file: String,
    pub issues: usize,
    pub ncloc: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub cells: BTreeMap<QualityKey, QualityCell>,
    pub files: Vec<FileDensity>,
    pub top_messages: Vec<(String, f64)>,
}

pub fn build_report(files: &BTreeMap<String, CompiledFile>, issues: &[Issue], k: usize) -> QualityReport {
    let compiled: BTreeSet<String> = files.keys().cloned().collect();
    let headline = headline_issues(issues, &compiled);
    let mut per_file: BTreeMap<&str, usize> = BTreeMap::new();
    for i in &headline {
        *per_file.entry(i.file.as_str()).or_default() += 1;
    }

    let mut cells: BTreeMap<QualityKey, QualityCell> = BTreeMap::new();
    let mut dist = Vec::new();
    for (path, f) in files {
        let ncloc = count_ncloc(&f.code, &f.target);
        let issues = per_file.get(path.as_str()).copied().unwrap_or(0);
        let cell = cells
            .entry(QualityKey {
                dataset: f.dataset.clone(),
                source: f.source.clone(),
                target: f.target.clone(),
                approach: f.approach,
                phase: f.phase,
            })
            .or_default();
        cell.files += 1;
        cell.issue_count += issues;
        cell.ncloc += ncloc;
        dist.push(FileDensity {
            dataset: f.dataset.clone(),
            method: format!("{}/{}", f.approach, f.phase),
            file: path.clone(),
            issues,
            ncloc,
        });
    }
    QualityReport {
        cells,
        files: dist,
        top_messages: top_messages(&headline, k),
    }
}

impl QualityReport {
    pub fn density_csv(&self) -> String {
        let mut out = format!("{DENSITY_CSV_HEADER}\n");
        for (k, c) in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                k.dataset,
                k.source,
                k.target,
                k.approach,
                k.phase,
                c.files,
                c.issue_count,
                c.ncloc,
                format_density(c.density())
            ));
        }
        out
    }

    pub fn distribution_csv(&self) -> String {
        let mut out = format!("{DISTRIBUTION_CSV_HEADER}\n");
        for f in &self.files {
            out.push_str(&format!(
                "{},{},{},{}\n",
                f.dataset,
                f.method,
                f.file,
                format_density(density(f.issues, f.ncloc))
            ));
        }
        out
    }

    pub fn top_messages_markdown(&self) -> String {
        let mut out = String::from("| # | Message | Share |\n|---:|---|---:|\n");
        for (n, (m, share)) in self.top_messages.iter().enumerate() {
            out.push_str(&format!(
                "| {} | {} | {:.2}% |\n",
                n + 1,
                m.replace('|', "\\|"),
                share * 100.0
            ));
        }
        out
    }
}
