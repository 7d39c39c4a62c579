//! The repair loop against scripted models that never fix the code, or fix
//! it on exactly the k-th round.

use bench_core::corpus::TestCase;
use bench_core::gateway::{ChatRequest, Gateway, ScriptedBackend};
use bench_core::harness::{ExecLimits, Harness, Outcome, ToolchainRegistry};
use bench_core::pipeline::Pipeline;
use bench_core::SubjectLanguage;

use crate::common::data_dir;

const LANGS: [(&str, &str); 3] = [("python", "py"), ("c", "c"), ("go", "go")];

fn comment(lang: &str) -> &'static str {
    if lang == "python" {
        "#"
    } else {
        "//"
    }
}

fn broken(good: &str, lang: &str, k: u32, round: u32) -> String {
    let junk = match lang {
        "python" => "def broken(:",
        "go" => "var broken = ;",
        _ => "int broken = ;",
    };
    format!("{} KFIX {k} ROUND {round}\n{good}\n{junk}\n", comment(lang))
}

fn number_after(text: &str, key: &str) -> Option<u32> {
    let rest = &text[text.find(key)? + key.len()..];
    rest.split_whitespace().next()?.parse().ok()
}

/// Fixes on round `k` when the code carries a `KFIX k` marker, otherwise
/// echoes the broken code back.
fn model(good: String, lang: &'static str) -> ScriptedBackend {
    ScriptedBackend::new().with_rule(move |req: &ChatRequest| {
        let code = req.prompt_text.split("\nAbove ").next()?;
        let reply = match (number_after(code, "KFIX "), number_after(code, "ROUND ")) {
            (Some(k), Some(round)) if round + 1 == k => good.clone(),
            (Some(k), Some(round)) => broken(&good, lang, k, round + 1),
            _ => code.to_string(),
        };
        Some(format!("```\n{reply}\n```\n{} End of Code", comment(lang)))
    })
}

pub fn check() -> Result<String, String> {
    let tasks = data_dir().join("oracle/tasks");
    let test = TestCase::new(
        std::fs::read_to_string(tasks.join("sum.in")).unwrap(),
        std::fs::read_to_string(tasks.join("sum.out")).unwrap(),
    );
    let mut traces = 0;
    for (lang, ext) in LANGS {
        let good = std::fs::read_to_string(data_dir().join(format!("oracle/pass/sum_{lang}.{ext}"))).unwrap();
        let target = SubjectLanguage::new(lang).unwrap();
        let harness = Harness::new(ToolchainRegistry::default(), ExecLimits::default());
        let pipeline = Pipeline::new(harness, Gateway::new(model(good.clone(), lang)));

        let never = format!(
            "{} never fixed\n{good}\n{}\n",
            comment(lang),
            broken("", lang, 0, 0).lines().last().unwrap()
        );
        let eval = pipeline.evaluate_code(&never, &target, std::slice::from_ref(&test));
        let trace = eval.repair.as_ref().ok_or(format!("{lang}: no repair trace"))?;
        if trace.iterations_used != 3 || eval.outcome != Outcome::CompilationError || trace.fixed {
            return Err(format!(
                "{lang} never-fix: iterations_used={} outcome={}",
                trace.iterations_used, eval.outcome
            ));
        }
        traces += 1;

        for k in 1..=3 {
            let eval = pipeline.evaluate_code(&broken(&good, lang, k, 0), &target, std::slice::from_ref(&test));
            let trace = eval.repair.as_ref().ok_or(format!("{lang} k={k}: no repair trace"))?;
            if trace.iterations_used != k || !trace.fixed || eval.outcome != Outcome::Success {
                return Err(format!(
                    "{lang} fix at {k}: iterations_used={} fixed={} outcome={}",
                    trace.iterations_used, trace.fixed, eval.outcome
                ));
            }
            traces += 1;
        }
    }
    Ok(format!(
        "{traces} traces over python/c/go: never-fix stops at 3 with compilation_error, fix-at-k uses exactly k"
    ))
}
