//! Acceptance checks. Prints one PASS/FAIL line per criterion and fails the
//! target if any criterion fails.

#[path = "../common/mod.rs"]
mod common;

mod corpus_repair;
mod determinism;
mod live_smoke;
mod metrics;
mod oracle;
mod prompts;
mod quality;
mod repair_budget;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Check = fn() -> Result<String, String>;

fn run(name: &str, check: Check) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match result {
        Ok(detail) => {
            println!("PASS {name} ({secs:.1}s): {detail}");
            true
        }
        Err(reason) => {
            println!("FAIL {name} ({secs:.1}s): {reason}");
            false
        }
    }
}

fn main() {
    let checks: Vec<(&str, Check)> = vec![
        ("pipeline-determinism", determinism::check),
        ("harness-oracle", || oracle::check(&common::data_dir().join("oracle"))),
        ("repair-loop-budget", repair_budget::check),
        ("corpus-repair-rule", corpus_repair::check),
        ("metrics-arithmetic", metrics::check),
        ("prompt-fidelity", prompts::check),
        ("quality-module", quality::check),
        ("live-smoke", live_smoke::check),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, check) in checks {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        if name == "live-smoke" && !live_smoke::enabled() {
            println!(
                "SKIP {name}: manual check; set {}=1 and {} to run it",
                live_smoke::ENV_ENABLE,
                bench_core::gateway::ENV_API_KEY
            );
            continue;
        }
        if !run(name, check) {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
