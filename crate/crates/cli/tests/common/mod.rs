//! Shared helpers for the CLI test targets: the shipped mini-corpus and
//! the scripted model that produced its replay fixtures.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bench_core::corpus::load_manifest;
use bench_core::gateway::{ChatRequest, ScriptedBackend};
use bench_core::SubjectLanguage;

pub const LANGS: [&str; 5] = ["c", "cpp", "go", "java", "python"];

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn mini_root() -> PathBuf {
    data_dir().join("mini")
}

pub fn mini_fixtures() -> PathBuf {
    data_dir().join("mini_fixtures.jsonl")
}

pub fn mini_golden_report() -> PathBuf {
    data_dir().join("mini_golden_report.md")
}

pub fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("bench binary runs")
}

/// Arguments of the replay run the fixtures were recorded for.
pub fn mini_run_args<'a>(corpus: &'a str, fixtures: &'a str, out: &'a str, report: &'a str) -> Vec<&'a str> {
    vec![
        "run",
        "--corpus",
        corpus,
        "--approach",
        "spec,spec+source",
        "--targets",
        "c,cpp,go,java,python",
        "--backend",
        "replay",
        "--fixtures",
        fixtures,
        "--out",
        out,
        "--report",
        report,
    ]
}

fn id_from_display(name: &str) -> Option<&'static str> {
    LANGS
        .into_iter()
        .find(|l| SubjectLanguage::new(*l).unwrap().display_name() == name)
}

fn between<'a>(text: &'a str, before: &str, after: &str) -> Option<&'a str> {
    let start = text.find(before)? + before.len();
    let len = text[start..].find(after)?;
    Some(&text[start..start + len])
}

fn task_of(text: &str) -> &'static str {
    if text.contains("count") {
        "vowels"
    } else {
        "sum"
    }
}

fn comment(lang: &str) -> &'static str {
    if lang == "python" {
        "#"
    } else {
        "//"
    }
}

fn broken(code: &str, lang: &str, marker: &str) -> String {
    let junk = match lang {
        "python" => "def broken(:",
        "go" => "var broken = ;",
        _ => "int broken = ;",
    };
    format!("{} {marker}\n{code}\n{junk}", comment(lang))
}

fn answer(code: &str, lang: &str) -> String {
    format!("```{lang}\n{code}\n```\n{} End of Code", comment(lang))
}

const SUM_SPEC: &str = "1. READ integer n\n2. READ n integers into values\n3. SET total TO 0\n4. FOR i FROM 0 TO n - 1 DO\n5.     ADD values[i] TO total\n6. END FOR\n7. PRINT total";
const VOWELS_SPEC: &str = "1. READ one line of text into line\n2. SET count TO 0\n3. FOR each character c IN lowercase(line) DO\n4.     IF c IS one of a, e, i, o, u THEN\n5.         INCREMENT count\n6.     END IF\n7. END FOR\n8. PRINT count";

/// A deterministic stand-in for the model. Most translations are the
/// corpus's own program in the target language; a few (task, approach,
/// target) combinations inject each failure the pipeline must handle.
pub fn mini_script(root: &Path) -> ScriptedBackend {
    let corpus = load_manifest(root).expect("mini corpus loads");
    let reference = move |task: &str, lang: &str| -> String {
        corpus
            .sample(&format!("{task}_{lang}"))
            .unwrap_or_else(|| panic!("no reference for {task}_{lang}"))
            .source_text
            .trim_end()
            .to_string()
    };
    ScriptedBackend::new().with_rule(move |req: &ChatRequest| {
        let p = &req.prompt_text;
        if p.contains("Give pseudocode for the above") {
            return Some(if task_of(p) == "vowels" { VOWELS_SPEC } else { SUM_SPEC }.to_string());
        }
        if p.contains("has compilation errors") {
            let target = id_from_display(between(p, "\nAbove ", " has compilation errors")?)?;
            let code = p.split("\nAbove ").next()?;
            let task = task_of(code);
            let reply = if code.contains("NEVER_FIXED") {
                code.to_string()
            } else if code.contains("FIX_TWICE_A") {
                broken(&reference(task, target), target, "FIX_TWICE_B")
            } else {
                reference(task, target)
            };
            return Some(answer(&reply, target));
        }
        let target = id_from_display(between(p, "Generate functionally correct and similar ", " code")?)?;
        let source = id_from_display(between(p, "The above pseudocode was generated from ", ". Generate")?)?;
        let spec_plus_source = p.contains("This is a ");
        let task = task_of(p);
        let good = reference(task, target);
        let reply = match (task, spec_plus_source, target) {
            ("sum", false, "c") => answer(&broken(&good, target, "FIX_ONCE"), target),
            ("sum", false, "go") => answer(&broken(&good, target, "FIX_TWICE_A"), target),
            ("sum", true, "python") => answer(&broken(&good, target, "NEVER_FIXED"), target),
            ("vowels", true, "go") => answer(&good.replace("strings.ToLower(line)", "line"), target),
            ("vowels", false, "cpp") => answer(&good.replace("return 0;", "return 1;"), target),
            ("vowels", true, "c") if source == "python" => "```\n```".to_string(),
            ("vowels", false, "python") if source == "java" => {
                format!(
                    "Sure! Here is the Python code:\n\n{}\n\nThis reads a line and counts vowels.",
                    answer(&good, target)
                )
            }
            _ => answer(&good, target),
        };
        Some(reply)
    })
}

/// A result record with only the fields metrics look at filled in.
pub fn attempt(
    dataset: &str,
    source: &str,
    target: &str,
    approach: bench_core::pipeline::Approach,
    pre: bench_core::harness::Outcome,
    post: bench_core::harness::Outcome,
) -> bench_core::pipeline::TranslationAttempt {
    bench_core::pipeline::TranslationAttempt {
        sample_id: String::new(),
        dataset_id: dataset.to_string(),
        approach,
        source_language: SubjectLanguage::new(source).unwrap(),
        target_language: SubjectLanguage::new(target).unwrap(),
        spec: None,
        raw_response: None,
        candidate_code: String::new(),
        final_code: String::new(),
        compiled: post != bench_core::harness::Outcome::CompilationError,
        repair: None,
        pre_repair_outcome: pre,
        outcome: post,
        test_verdicts: Vec::new(),
        request_digests: Vec::new(),
        flags: Default::default(),
    }
}
