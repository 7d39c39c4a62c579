use bench_core::corpus::{load_manifest, Corpus};

use crate::common::{bench, data_dir};

pub fn check() -> Result<String, String> {
    let input = data_dir().join("avatar_like");
    let expected: Corpus = load_manifest(&data_dir().join("avatar_like_expected")).map_err(|e| e.to_string())?;
    let original = load_manifest(&input).map_err(|e| e.to_string())?;
    let out = tempfile::tempdir().unwrap();
    let o = bench(&[
        "corpus",
        "validate",
        input.to_str().unwrap(),
        "--repair",
        "--write",
        "--out",
        out.path().to_str().unwrap(),
        "--deadline",
        "2",
    ]);
    if !o.status.success() {
        return Err(format!(
            "corpus validate failed: {}",
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    let repaired = load_manifest(out.path()).map_err(|e| e.to_string())?;

    let mut diffs = Vec::new();
    for sample in &expected.samples {
        match repaired.sample(&sample.sample_id) {
            None => diffs.push(format!("{} missing", sample.sample_id)),
            Some(got) if got != sample => diffs.push(format!("{} differs", sample.sample_id)),
            _ => {}
        }
    }
    for sample in &repaired.samples {
        if expected.sample(&sample.sample_id).is_none() {
            diffs.push(format!("{} kept but expected excluded", sample.sample_id));
        }
    }
    if repaired.excluded != expected.excluded {
        diffs.push(format!("exclusions {:?} != {:?}", repaired.excluded, expected.excluded));
    }
    if repaired != expected {
        diffs.push("corpus differs".into());
    }
    if !diffs.is_empty() {
        return Err(diffs.join("; "));
    }

    let rewritten = original
        .samples
        .iter()
        .flat_map(|s| s.tests.iter().map(move |t| (s, t)))
        .filter(|(s, t)| {
            t.truncated
                && repaired
                    .sample(&s.sample_id)
                    .is_some_and(|r| r.tests.iter().any(|rt| rt.in_file == t.in_file && !rt.truncated))
        })
        .count();
    Ok(format!(
        "{} samples in: {} kept ({} truncated tests rewritten to actual output), {} excluded; 100% agreement",
        original.samples.len(),
        repaired.samples.len(),
        rewritten,
        repaired.excluded.len()
    ))
}
