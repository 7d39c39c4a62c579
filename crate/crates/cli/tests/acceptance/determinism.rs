use std::path::Path;
use std::time::{Duration, Instant};

use crate::common::{bench, mini_fixtures, mini_root, mini_run_args};

const BUDGET: Duration = Duration::from_secs(120);

fn replay(dir: &Path) -> Result<(Vec<u8>, Vec<u8>), String> {
    let out = dir.join("results.jsonl");
    let report = dir.join("report.md");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let (root, fixtures, out_s, report_s) = (s(&mini_root()), s(&mini_fixtures()), s(&out), s(&report));
    let o = bench(&mini_run_args(&root, &fixtures, &out_s, &report_s));
    if !o.status.success() {
        return Err(format!("bench run failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    Ok((std::fs::read(out).unwrap(), std::fs::read(report).unwrap()))
}

pub fn check() -> Result<String, String> {
    let languages = bench_core::corpus::load_manifest(&mini_root())
        .map_err(|e| e.to_string())?
        .languages();
    if languages.len() != 5 {
        return Err(format!("mini-corpus spans {} languages", languages.len()));
    }
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let first = replay(a.path())?;
    let second = replay(b.path())?;
    let elapsed = start.elapsed();
    if first.0 != second.0 {
        return Err("results.jsonl differs between runs".into());
    }
    if first.1 != second.1 {
        return Err("report.md differs between runs".into());
    }
    if elapsed >= BUDGET {
        return Err(format!("two runs took {:.1}s", elapsed.as_secs_f64()));
    }
    let attempts = String::from_utf8_lossy(&first.0).lines().count();
    Ok(format!(
        "{attempts} attempts per run, results.jsonl and report.md byte-identical, two runs in {:.1}s",
        elapsed.as_secs_f64()
    ))
}
