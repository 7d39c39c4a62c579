//! Hand-labelled programs: every file under `data/oracle/<class>/` must be
//! classified as its directory says.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use bench_core::corpus::TestCase;
use bench_core::harness::{ExecLimits, Harness, Outcome, ToolchainRegistry};
use bench_core::SubjectLanguage;

const CLASSES: [(&str, Outcome); 6] = [
    ("pass", Outcome::Success),
    ("compile_error", Outcome::CompilationError),
    ("wrong_output", Outcome::TestMismatch),
    ("nonzero_exit", Outcome::RuntimeError),
    ("infinite_loop", Outcome::Timeout),
    ("stdin_starved", Outcome::Timeout),
];

pub const DEADLINE: Duration = Duration::from_secs(2);

struct Program {
    class: &'static str,
    label: Outcome,
    name: String,
    language: SubjectLanguage,
    code: String,
    test: TestCase,
}

fn load(root: &Path) -> Vec<Program> {
    let mut programs = Vec::new();
    for (class, label) in CLASSES {
        let mut files: Vec<_> = std::fs::read_dir(root.join(class))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        for path in files {
            let ext = path.extension().unwrap().to_str().unwrap();
            let stem = path.file_stem().unwrap().to_str().unwrap();
            let task = stem.split('_').next().unwrap();
            let read =
                |suffix: &str| std::fs::read_to_string(root.join("tasks").join(format!("{task}.{suffix}"))).unwrap();
            programs.push(Program {
                class,
                label,
                name: format!("{class}/{stem}"),
                language: SubjectLanguage::from_extension(ext).unwrap(),
                code: std::fs::read_to_string(&path).unwrap(),
                test: TestCase::new(read("in"), read("out")),
            });
        }
    }
    programs
}

pub fn check(root: &Path) -> Result<String, String> {
    let programs = load(root);
    for (class, _) in CLASSES {
        let n = programs.iter().filter(|p| p.class == class).count();
        if n < 25 {
            return Err(format!("only {n} programs labelled {class}"));
        }
    }
    let limits = ExecLimits {
        wall_deadline: DEADLINE,
        ..ExecLimits::default()
    };
    let harness = Harness::new(ToolchainRegistry::default(), limits);

    let mut disagreements = Vec::new();
    let mut slowest_pass: BTreeMap<String, Duration> = BTreeMap::new();
    let mut record = |p: &Program, got: Outcome| {
        if got != p.label {
            disagreements.push(format!("{} ({}): got {got}, labelled {}", p.name, p.language, p.label));
        }
    };

    // Terminating programs run one at a time so their timings are clean.
    for p in programs.iter().filter(|p| p.label != Outcome::Timeout) {
        let (_, run, outcome) = harness
            .evaluate(&p.code, &p.language, std::slice::from_ref(&p.test))
            .map_err(|e| format!("{}: {e}", p.name))?;
        if p.label == Outcome::Success {
            if let Some(run) = &run {
                let slot = slowest_pass.entry(p.language.to_string()).or_default();
                *slot = (*slot).max(run.per_test[0].elapsed);
            }
        }
        record(p, outcome);
    }

    // Programs expected to hang are built first, then all run at once.
    let hanging: Vec<&Program> = programs.iter().filter(|p| p.label == Outcome::Timeout).collect();
    let mut built = Vec::new();
    for p in &hanging {
        let program = harness
            .compile(&p.code, &p.language)
            .map_err(|e| format!("{}: {e}", p.name))?;
        built.push(program);
    }
    let outcomes: Vec<Outcome> = std::thread::scope(|scope| {
        let handles: Vec<_> = hanging
            .iter()
            .zip(&built)
            .map(|(p, program)| {
                let harness = &harness;
                scope.spawn(move || {
                    if program.compile.status != bench_core::harness::CompileStatus::Ok {
                        return Outcome::CompilationError;
                    }
                    harness
                        .run_tests(program, std::slice::from_ref(&p.test))
                        .map(|r| r.overall)
                        .unwrap_or(Outcome::CompilationError)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for (p, got) in hanging.iter().zip(outcomes) {
        record(p, got);
    }

    if !disagreements.is_empty() {
        return Err(format!(
            "{} of {} disagree: {}",
            disagreements.len(),
            programs.len(),
            disagreements.join("; ")
        ));
    }
    let margins: Vec<String> = slowest_pass
        .iter()
        .map(|(lang, d)| {
            format!(
                "{lang} {:.3}s ({:.0}x)",
                d.as_secs_f64(),
                DEADLINE.as_secs_f64() / d.as_secs_f64()
            )
        })
        .collect();
    Ok(format!(
        "{} programs, 100% agreement; slowest passing run per language vs {}s deadline: {}",
        programs.len(),
        DEADLINE.as_secs(),
        margins.join(", ")
    ))
}
