//! Manual end-to-end run against a real provider. Runs only when
//! `BENCH_LIVE_SMOKE=1` and the API key are set.

use bench_core::corpus::{load_manifest, write_corpus};
use bench_core::gateway::ENV_API_KEY;

use crate::common::{bench, mini_root};

pub const ENV_ENABLE: &str = "BENCH_LIVE_SMOKE";

pub fn enabled() -> bool {
    std::env::var(ENV_ENABLE).is_ok_and(|v| v == "1") && std::env::var(ENV_API_KEY).is_ok()
}

pub fn check() -> Result<String, String> {
    let dir = tempfile::tempdir().unwrap();
    let mut corpus = load_manifest(&mini_root()).map_err(|e| e.to_string())?;
    corpus.samples.retain(|s| s.sample_id.starts_with("sum_"));
    let root = dir.path().join("corpus");
    write_corpus(&corpus, &root).map_err(|e| e.to_string())?;

    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let (fixtures, live_out, replay_out) = (p("fixtures.jsonl"), p("live.jsonl"), p("replay.jsonl"));
    let common = [
        "--corpus",
        root.to_str().unwrap(),
        "--approach",
        "spec",
        "--targets",
        "python,c",
        "--jobs",
        "2",
    ];

    let mut args = vec![
        "run",
        "--backend",
        "live",
        "--record",
        "--fixtures",
        &fixtures,
        "--out",
        &live_out,
    ];
    args.extend(common);
    let o = bench(&args);
    if !o.status.success() {
        return Err(format!("live run failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let recorded = std::fs::read_to_string(&fixtures)
        .map_err(|e| e.to_string())?
        .lines()
        .count();

    let mut args = vec![
        "run",
        "--backend",
        "replay",
        "--fixtures",
        &fixtures,
        "--out",
        &replay_out,
    ];
    args.extend(common);
    let o = bench(&args);
    if !o.status.success() {
        return Err(format!("replay failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let live = std::fs::read(&live_out).unwrap();
    let replay = std::fs::read(&replay_out).unwrap();
    if live != replay {
        return Err("replayed results differ from the live run".into());
    }
    Ok(format!(
        "5 samples end-to-end, {recorded} fixtures recorded and replayed identically"
    ))
}
