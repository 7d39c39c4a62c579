//! Aggregates over a constructed result set whose counts encode the
//! reference averages, plus merge safety over random partitions.

use bench_core::harness::Outcome;
use bench_core::metrics::{pass_at_1, repair_delta, PassRateMatrix};
use bench_core::pipeline::{Approach, Phase, TranslationAttempt};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::common::attempt;

const TOLERANCE: f64 = 0.05;
const PAIRS: [(&str, &str); 5] = [
    ("c", "java"),
    ("cpp", "python"),
    ("go", "c"),
    ("java", "go"),
    ("python", "cpp"),
];
const PER_CELL: u64 = 2000;

/// (approach, pre-repair successes per cell, successes gained by repair per cell)
const COUNTS: [(Approach, [u64; 5], u64); 3] = [
    (Approach::SpecOnly, [1200, 1250, 1300, 1350, 1380], 170),
    (Approach::SpecPlusSource, [1450, 1480, 1500, 1530, 1555], 122),
    (Approach::SourceOnly, [1500, 1520, 1537, 1550, 1579], 0),
];

fn fixture() -> Vec<TranslationAttempt> {
    let mut out = Vec::new();
    for (approach, pre, gained) in COUNTS {
        for ((src, tgt), ok) in PAIRS.into_iter().zip(pre) {
            for i in 0..PER_CELL {
                let (before, after) = if i < ok {
                    (Outcome::Success, Outcome::Success)
                } else if i < ok + gained {
                    (Outcome::CompilationError, Outcome::Success)
                } else if i % 3 == 0 {
                    (Outcome::CompilationError, Outcome::CompilationError)
                } else {
                    (Outcome::TestMismatch, Outcome::TestMismatch)
                };
                out.push(attempt("fixture", src, tgt, approach, before, after));
            }
        }
    }
    out
}

fn near(label: &str, got: f64, want: f64, errors: &mut Vec<String>) -> String {
    if (got - want).abs() > TOLERANCE {
        errors.push(format!("{label}: {got:.4} vs {want}"));
    }
    format!("{label} {got:.2}")
}

fn random_result_set(rng: &mut StdRng, n: usize) -> Vec<TranslationAttempt> {
    let langs = ["c", "cpp", "go", "java", "python"];
    (0..n)
        .map(|_| {
            let s = langs[rng.random_range(0..5)];
            let t = langs[rng.random_range(0..5)];
            let a = Approach::ALL[rng.random_range(0..3)];
            let pre = Outcome::ALL[rng.random_range(0..5)];
            let post = if pre == Outcome::CompilationError {
                Outcome::ALL[rng.random_range(0..5)]
            } else {
                pre
            };
            let ds = ["avatar", "codenet"][rng.random_range(0..2)];
            attempt(ds, s, t, a, pre, post)
        })
        .collect()
}

pub fn check() -> Result<String, String> {
    let attempts = fixture();
    let mut errors = Vec::new();
    let mut parts = Vec::new();
    let of =
        |a: Approach| -> Vec<TranslationAttempt> { attempts.iter().filter(|x| x.approach == a).cloned().collect() };

    let p = |a, phase| pass_at_1(&of(a), phase).percent().unwrap();
    parts.push(near(
        "spec pre",
        p(Approach::SpecOnly, Phase::PreRepair),
        64.8,
        &mut errors,
    ));
    parts.push(near(
        "spec+source pre",
        p(Approach::SpecPlusSource, Phase::PreRepair),
        75.15,
        &mut errors,
    ));
    parts.push(near(
        "source",
        p(Approach::SourceOnly, Phase::PostRepair),
        76.86,
        &mut errors,
    ));

    let matrix = PassRateMatrix::from_attempts(&attempts);
    for (a, want) in [
        (Approach::SpecOnly, 64.8),
        (Approach::SpecPlusSource, 75.15),
        (Approach::SourceOnly, 76.86),
    ] {
        let avg = matrix.approach_average(a, Phase::PreRepair);
        near("weighted", avg.weighted.percent().unwrap(), want, &mut errors);
        near("unweighted", avg.unweighted.unwrap() * 100.0, want, &mut errors);
    }
    let deltas = repair_delta(&matrix).map_err(|e| e.to_string())?;
    for (a, want) in [
        (Approach::SpecOnly, 8.5),
        (Approach::SpecPlusSource, 6.1),
        (Approach::SourceOnly, 0.0),
    ] {
        let d = deltas[&a];
        let label = format!("{a} delta");
        parts.push(near(&label, d.weighted_points.unwrap(), want, &mut errors));
        near(&label, d.unweighted_points.unwrap(), want, &mut errors);
    }

    let mut rng = StdRng::seed_from_u64(0x5eed);
    let set = random_result_set(&mut rng, 3000);
    let whole = PassRateMatrix::from_attempts(&set);
    let whole_delta = repair_delta(&whole).map_err(|e| e.to_string())?;
    for round in 0..1000 {
        let k = rng.random_range(1..=12);
        let mut shards = vec![PassRateMatrix::new(); k];
        for a in &set {
            shards[rng.random_range(0..k)].record(a);
        }
        let mut merged = PassRateMatrix::new();
        for s in &shards {
            merged.merge(s);
        }
        if merged != whole {
            errors.push(format!("partition {round} ({k} shards) changed the matrix"));
            break;
        }
        if repair_delta(&merged).map_err(|e| e.to_string())? != whole_delta {
            errors.push(format!("partition {round} changed repair deltas"));
            break;
        }
    }

    if errors.is_empty() {
        Ok(format!("{}; merge-safe under 1000 random partitions", parts.join(", ")))
    } else {
        Err(errors.join("; "))
    }
}
