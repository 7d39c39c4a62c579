//! NCLOC against hand labels, top-message shares, density arithmetic.

use std::collections::BTreeMap;

use bench_core::pipeline::{Approach, Phase};
use bench_core::quality::{build_report, code_lines, density, format_density, CompiledFile, Issue, Severity};
use bench_core::SubjectLanguage;

use crate::common::data_dir;

/// Per line: `C` has code, `.` is blank or comment only.
pub const NCLOC_LABELS: [(&str, &str); 5] = [
    ("sample.c", "..C.CC.CCC...CC.CCC."),
    ("sample.cpp", ".CC..C.C.CCC.C.CC.CC"),
    ("sample.go", ".C.C....CCC.CCCC..C."),
    ("Sample.java", "C....C.CC.CC.CCCCCCC"),
    ("sample.py", ".C.CC.C..C.CC..CCCC."),
];

const LEADING: &str = "Add a field width specifier to this \"%s\" placeholder.";
const RANKED: [(&str, usize); 10] = [
    (LEADING, 1813),
    ("Refactor this function to reduce its Cognitive Complexity.", 1237),
    ("Define a constant instead of duplicating this literal.", 1069),
    ("Remove this unused local variable.", 868),
    ("Merge this if statement with the enclosing one.", 764),
    ("Add a default case to this switch.", 499),
    ("Rename this variable to match the naming convention.", 246),
    ("Remove this useless assignment.", 97),
    ("Replace this generic exception with a specific one.", 91),
    ("Add curly braces around this block.", 78),
];
const HEADLINE_TOTAL: usize = 10_000;

fn ncloc() -> Result<String, String> {
    let mut total = 0;
    for (file, labels) in NCLOC_LABELS {
        let code = std::fs::read_to_string(data_dir().join("ncloc").join(file)).unwrap();
        let ext = file.rsplit('.').next().unwrap();
        let lang = SubjectLanguage::from_extension(ext).unwrap();
        let got: String = code_lines(&code, lang.comment_syntax())
            .into_iter()
            .map(|c| if c { 'C' } else { '.' })
            .collect();
        if got != labels {
            return Err(format!("{file}: scanner {got} vs hand {labels}"));
        }
        let count = labels.chars().filter(|&c| c == 'C').count();
        if bench_core::quality::count_ncloc(&code, &lang) != count {
            return Err(format!("{file}: count_ncloc disagrees with {count}"));
        }
        total += count;
    }
    Ok(format!("5 x 20-line fixtures match line by line ({total} NCLOC)"))
}

fn file(path: &str, target: &str, code: &str) -> (String, CompiledFile) {
    (
        path.to_string(),
        CompiledFile {
            path: path.to_string(),
            dataset: "fixture".into(),
            source: SubjectLanguage::new("java").unwrap(),
            target: SubjectLanguage::new(target).unwrap(),
            approach: Approach::SpecOnly,
            phase: Phase::PostRepair,
            code: code.to_string(),
        },
    )
}

fn issue(message: &str, severity: Severity, file: &str) -> Issue {
    Issue {
        rule_id: "rule".into(),
        severity,
        message: message.to_string(),
        file: file.to_string(),
        language: None,
    }
}

fn shares_and_density() -> Result<String, String> {
    let c_code = std::fs::read_to_string(data_dir().join("ncloc/sample.c")).unwrap();
    let py_code = std::fs::read_to_string(data_dir().join("ncloc/sample.py")).unwrap();
    let c_path = "spec/post_repair/fixture/java_to_c/a.c";
    let py_path = "spec/post_repair/fixture/java_to_python/b.py";
    let files: BTreeMap<String, CompiledFile> = [file(c_path, "c", &c_code), file(py_path, "python", &py_code)].into();

    let mut issues = Vec::new();
    let mut headline = 0;
    for (n, (message, count)) in RANKED.iter().enumerate() {
        for i in 0..*count {
            let sev = if (n + i) % 2 == 0 {
                Severity::Blocker
            } else {
                Severity::Critical
            };
            issues.push(issue(message, sev, if i % 2 == 0 { c_path } else { py_path }));
        }
        headline += count;
    }
    let mut filler = 0;
    while headline < HEADLINE_TOTAL {
        let n = (HEADLINE_TOTAL - headline).min(75);
        for _ in 0..n {
            issues.push(issue(
                &format!("Minor pattern {filler:02}."),
                Severity::Critical,
                py_path,
            ));
        }
        headline += n;
        filler += 1;
    }
    // Neither counts: below the severity cut, or not a compiled file.
    for _ in 0..2500 {
        issues.push(issue(LEADING, Severity::Other, c_path));
        issues.push(issue(
            LEADING,
            Severity::Blocker,
            "spec/pre_repair/fixture/java_to_c/never_built.c",
        ));
    }

    let report = build_report(&files, &issues, 10);
    let (top, share) = report.top_messages.first().cloned().ok_or("no top messages")?;
    if top != LEADING || (share * 100.0 - 18.13).abs() > 0.01 {
        return Err(format!("leading message {top:?} at {:.4}%", share * 100.0));
    }
    for ((m, s), (want, count)) in report.top_messages.iter().zip(RANKED) {
        if m != want || *s != count as f64 / HEADLINE_TOTAL as f64 {
            return Err(format!("ranking: {m:?} {s} vs {want:?}"));
        }
    }

    // Density over hand-counted NCLOC.
    let c_issues: usize = RANKED.iter().map(|(_, n)| n.div_ceil(2)).sum();
    let c_ncloc = NCLOC_LABELS[0].1.matches('C').count();
    let cell = report
        .cells
        .iter()
        .find(|(k, _)| k.target.id() == "c")
        .map(|(_, c)| *c)
        .ok_or("no C cell")?;
    if cell.issue_count != c_issues || cell.ncloc != c_ncloc {
        return Err(format!(
            "C cell {cell:?}, expected {c_issues} issues over {c_ncloc} NCLOC"
        ));
    }
    if cell.density() != Some(1000.0 * c_issues as f64 / c_ncloc as f64) {
        return Err("C cell density".into());
    }
    if density(5, 250) != Some(20.0) || density(10, 500) != Some(20.0) || format_density(density(3, 0)) != "—" {
        return Err("density arithmetic".into());
    }
    Ok(format!(
        "leading message at {:.2}% over {HEADLINE_TOTAL} headline issues; density {} = 1000 x {c_issues} / {c_ncloc}",
        share * 100.0,
        format_density(cell.density())
    ))
}

pub fn check() -> Result<String, String> {
    Ok(format!("{}; {}", ncloc()?, shares_and_density()?))
}
