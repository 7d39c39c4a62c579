//! Pass@1 matrices, outcome breakdowns, repair deltas and report rendering.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::Outcome;
use crate::pipeline::{Approach, Phase, TranslationAttempt};
use crate::SubjectLanguage;

/// Printed in place of a rate with an empty denominator.
pub const UNDEFINED: &str = "—";

pub const CSV_HEADER: &str =
    "dataset,source,target,approach,phase,successes,total,rate,compile_err,mismatch,runtime_err,timeout";

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cell {0} has no {1} counterpart")]
    PhaseMissing(String, Phase),
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error("row {row}: {message}")]
    Inconsistent { row: usize, message: String },
}

/// A success count over a denominator; the rate is undefined at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: u64,
    pub total: u64,
}

impl Rate {
    pub fn new(successes: u64, total: u64) -> Self {
        debug_assert!(successes <= total);
        Self { successes, total }
    }

    pub fn value(self) -> Option<f64> {
        (self.total > 0).then(|| self.successes as f64 / self.total as f64)
    }

    pub fn percent(self) -> Option<f64> {
        self.value().map(|v| v * 100.0)
    }
}

impl Add for Rate {
    type Output = Rate;

    fn add(self, rhs: Rate) -> Rate {
        Rate::new(self.successes + rhs.successes, self.total + rhs.total)
    }
}

impl AddAssign for Rate {
    fn add_assign(&mut self, rhs: Rate) {
        *self = *self + rhs;
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.percent() {
            Some(p) => write!(f, "{p:.2}%"),
            None => f.write_str(UNDEFINED),
        }
    }
}

pub fn pass_at_1(attempts: &[TranslationAttempt], phase: Phase) -> Rate {
    let successes = attempts
        .iter()
        .filter(|a| a.outcome_for(phase) == Outcome::Success)
        .count();
    Rate::new(successes as u64, attempts.len() as u64)
}

/// Counts per outcome kind, indexed by [`Outcome::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeBreakdown(pub [u64; 5]);

impl OutcomeBreakdown {
    pub fn record(&mut self, outcome: Outcome) {
        self.0[outcome.index()] += 1;
    }

    pub fn count(&self, outcome: Outcome) -> u64 {
        self.0[outcome.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn rate(&self) -> Rate {
        Rate::new(self.count(Outcome::Success), self.total())
    }
}

impl AddAssign for OutcomeBreakdown {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

/// Ordering of this struct's fields is the report order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub dataset: String,
    pub source: SubjectLanguage,
    pub target: SubjectLanguage,
    pub approach: Approach,
    pub phase: Phase,
}

impl CellKey {
    fn with_phase(&self, phase: Phase) -> CellKey {
        CellKey { phase, ..self.clone() }
    }
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}->{}/{}/{}",
            self.dataset, self.source, self.target, self.approach, self.phase
        )
    }
}

/// Per-cell outcome counts; the success rate of a cell is derived from them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PassRateMatrix {
    cells: BTreeMap<CellKey, OutcomeBreakdown>,
}

impl PassRateMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_attempts<'a>(attempts: impl IntoIterator<Item = &'a TranslationAttempt>) -> Self {
        let mut m = Self::new();
        for a in attempts {
            m.record(a);
        }
        m
    }

    /// Adds one attempt to both phases.
    pub fn record(&mut self, attempt: &TranslationAttempt) {
        for phase in Phase::ALL {
            let key = CellKey {
                dataset: attempt.dataset_id.clone(),
                source: attempt.source_language.clone(),
                target: attempt.target_language.clone(),
                approach: attempt.approach,
                phase,
            };
            self.cells.entry(key).or_default().record(attempt.outcome_for(phase));
        }
    }

    pub fn insert(&mut self, key: CellKey, breakdown: OutcomeBreakdown) {
        *self.cells.entry(key).or_default() += breakdown;
    }

    pub fn merge(&mut self, other: &PassRateMatrix) {
        for (k, b) in &other.cells {
            self.insert(k.clone(), *b);
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, &OutcomeBreakdown)> {
        self.cells.iter()
    }

    pub fn get(&self, key: &CellKey) -> Option<&OutcomeBreakdown> {
        self.cells.get(key)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn approaches(&self) -> Vec<Approach> {
        let mut v: Vec<Approach> = self.cells.keys().map(|k| k.approach).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn approach_average(&self, approach: Approach, phase: Phase) -> Average {
        Average::over(
            self.cells
                .iter()
                .filter(|(k, _)| k.approach == approach && k.phase == phase)
                .map(|(_, b)| b.rate()),
        )
    }

    /// Rows in report order: one per cell, pre before post.
    pub fn rows(&self) -> Vec<ReportRow> {
        self.cells
            .iter()
            .map(|(k, b)| ReportRow {
                dataset: k.dataset.clone(),
                source: k.source.clone(),
                target: k.target.clone(),
                approach: k.approach,
                phase: k.phase,
                successes: b.count(Outcome::Success),
                total: b.total(),
                rate: b.rate().value(),
                compile_err: b.count(Outcome::CompilationError),
                mismatch: b.count(Outcome::TestMismatch),
                runtime_err: b.count(Outcome::RuntimeError),
                timeout: b.count(Outcome::Timeout),
            })
            .collect()
    }

    pub fn from_rows(rows: &[ReportRow]) -> Result<Self, MetricsError> {
        let mut m = Self::new();
        for (i, r) in rows.iter().enumerate() {
            let mut b = OutcomeBreakdown::default();
            b.0[Outcome::Success.index()] = r.successes;
            b.0[Outcome::CompilationError.index()] = r.compile_err;
            b.0[Outcome::TestMismatch.index()] = r.mismatch;
            b.0[Outcome::RuntimeError.index()] = r.runtime_err;
            b.0[Outcome::Timeout.index()] = r.timeout;
            if b.total() != r.total {
                return Err(MetricsError::Inconsistent {
                    row: i + 1,
                    message: format!("outcome counts sum to {} but total is {}", b.total(), r.total),
                });
            }
            m.insert(
                CellKey {
                    dataset: r.dataset.clone(),
                    source: r.source.clone(),
                    target: r.target.clone(),
                    approach: r.approach,
                    phase: r.phase,
                },
                b,
            );
        }
        Ok(m)
    }
}

/// Cross-cell mean, both ways: pooled over attempts and plain over cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Average {
    pub weighted: Rate,
    /// Mean of per-cell rates; cells with no attempts are skipped.
    pub unweighted: Option<f64>,
    pub cells: usize,
}

impl Average {
    pub fn over(rates: impl IntoIterator<Item = Rate>) -> Self {
        let mut weighted = Rate::default();
        let mut sum = 0.0;
        let mut defined = 0;
        let mut cells = 0;
        for r in rates {
            cells += 1;
            weighted += r;
            if let Some(v) = r.value() {
                sum += v;
                defined += 1;
            }
        }
        Self {
            weighted,
            unweighted: (defined > 0).then(|| sum / defined as f64),
            cells,
        }
    }
}

/// Post-repair minus pre-repair, in percentage points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepairDelta {
    pub weighted_points: Option<f64>,
    pub unweighted_points: Option<f64>,
    pub cells: usize,
}

pub fn repair_delta(matrix: &PassRateMatrix) -> Result<BTreeMap<Approach, RepairDelta>, MetricsError> {
    let mut per: BTreeMap<Approach, (i64, u64, f64, usize, usize)> = BTreeMap::new();
    for (key, _) in matrix.cells() {
        let other = match key.phase {
            Phase::PreRepair => Phase::PostRepair,
            Phase::PostRepair => Phase::PreRepair,
        };
        if matrix.get(&key.with_phase(other)).is_none() {
            return Err(MetricsError::PhaseMissing(key.to_string(), other));
        }
    }
    for (key, post) in matrix.cells().filter(|(k, _)| k.phase == Phase::PostRepair) {
        let pre = matrix.get(&key.with_phase(Phase::PreRepair)).expect("checked above");
        let (pre, post) = (pre.rate(), post.rate());
        let e = per.entry(key.approach).or_default();
        e.0 += post.successes as i64 - pre.successes as i64;
        e.1 += post.total.max(pre.total);
        e.3 += 1;
        if let (Some(a), Some(b)) = (pre.value(), post.value()) {
            e.2 += b - a;
            e.4 += 1;
        }
    }
    Ok(per
        .into_iter()
        .map(|(a, (diff, total, sum, cells, defined))| {
            (
                a,
                RepairDelta {
                    weighted_points: (total > 0).then(|| 100.0 * diff as f64 / total as f64),
                    unweighted_points: (defined > 0).then(|| 100.0 * sum / defined as f64),
                    cells,
                },
            )
        })
        .collect())
}

/// One CSV/JSON report line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub source: SubjectLanguage,
    pub target: SubjectLanguage,
    pub approach: Approach,
    pub phase: Phase,
    pub successes: u64,
    pub total: u64,
    pub rate: Option<f64>,
    pub compile_err: u64,
    pub mismatch: u64,
    pub runtime_err: u64,
    pub timeout: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            other => Err(format!(
                "unknown report format `{other}` (expected json, csv or markdown)"
            )),
        }
    }
}

fn fmt_rate(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_else(|| UNDEFINED.to_string())
}

fn fmt_points(v: Option<f64>) -> String {
    v.map(|v| format!("{v:+.2}")).unwrap_or_else(|| UNDEFINED.to_string())
}

fn fmt_percent(v: Option<f64>) -> String {
    v.map(|v| format!("{:.2}%", v * 100.0))
        .unwrap_or_else(|| UNDEFINED.to_string())
}

pub fn emit_report(matrix: &PassRateMatrix, format: ReportFormat) -> Result<String, MetricsError> {
    Ok(match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&matrix.rows()).expect("rows serialize");
            s.push('\n');
            s
        }
        ReportFormat::Csv => emit_csv(matrix),
        ReportFormat::Markdown => emit_markdown(matrix)?,
    })
}

pub fn parse_json_report(text: &str) -> Result<PassRateMatrix, MetricsError> {
    let rows: Vec<ReportRow> = serde_json::from_str(text).map_err(|e| MetricsError::Malformed(e.to_string()))?;
    PassRateMatrix::from_rows(&rows)
}

fn emit_csv(matrix: &PassRateMatrix) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in matrix.rows() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.dataset,
            r.source,
            r.target,
            r.approach,
            r.phase,
            r.successes,
            r.total,
            fmt_rate(r.rate),
            r.compile_err,
            r.mismatch,
            r.runtime_err,
            r.timeout
        ));
    }
    out
}

fn emit_markdown(matrix: &PassRateMatrix) -> Result<String, MetricsError> {
    let approaches = matrix.approaches();
    let mut out = String::from("# Translation results\n");

    for phase in Phase::ALL {
        out.push_str(&format!("\n## pass@1 ({phase})\n\n| Dataset | Source | Target |"));
        for a in &approaches {
            out.push_str(&format!(" {a} |"));
        }
        out.push_str("\n|---|---|---|");
        out.push_str(&"---:|".repeat(approaches.len()));
        out.push('\n');

        let mut pairs: Vec<(&str, &SubjectLanguage, &SubjectLanguage)> = matrix
            .cells()
            .filter(|(k, _)| k.phase == phase)
            .map(|(k, _)| (k.dataset.as_str(), &k.source, &k.target))
            .collect();
        pairs.dedup();
        for (dataset, source, target) in pairs {
            out.push_str(&format!(
                "| {dataset} | {} | {} |",
                source.display_name(),
                target.display_name()
            ));
            for &approach in &approaches {
                let key = CellKey {
                    dataset: dataset.to_string(),
                    source: source.clone(),
                    target: target.clone(),
                    approach,
                    phase,
                };
                match matrix.get(&key) {
                    Some(b) => {
                        let r = b.rate();
                        out.push_str(&format!(" {} ({}/{}) |", fmt_percent(r.value()), r.successes, r.total));
                    }
                    None => out.push_str(&format!(" {UNDEFINED} |")),
                }
            }
            out.push('\n');
        }
    }

    out.push_str("\n## Averages\n\n| Approach | Phase | Weighted | Unweighted | Cells |\n|---|---|---:|---:|---:|\n");
    for &a in &approaches {
        for phase in Phase::ALL {
            let avg = matrix.approach_average(a, phase);
            out.push_str(&format!(
                "| {a} | {phase} | {} | {} | {} |\n",
                fmt_percent(avg.weighted.value()),
                fmt_percent(avg.unweighted),
                avg.cells
            ));
        }
    }

    out.push_str("\n## Outcomes (post_repair)\n\n| Approach | success | compilation_error | test_mismatch | runtime_error | timeout |\n|---|---:|---:|---:|---:|---:|\n");
    for &a in &approaches {
        let mut total = OutcomeBreakdown::default();
        for (_, b) in matrix
            .cells()
            .filter(|(k, _)| k.approach == a && k.phase == Phase::PostRepair)
        {
            total += *b;
        }
        out.push_str(&format!("| {a} |"));
        for o in Outcome::ALL {
            out.push_str(&format!(" {} |", total.count(o)));
        }
        out.push('\n');
    }

    out.push_str("\n## Repair delta (points)\n\n| Approach | Weighted | Unweighted | Cells |\n|---|---:|---:|---:|\n");
    for (a, d) in repair_delta(matrix)? {
        out.push_str(&format!(
            "| {a} | {} | {} | {} |\n",
            fmt_points(d.weighted_points),
            fmt_points(d.unweighted_points),
            d.cells
        ));
    }
    Ok(out)
}
