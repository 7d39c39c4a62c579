use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use bench_core::config::RunConfig;
use bench_core::corpus::{self, ValidationStatus, ValidationVerdict};
use bench_core::gateway::{sha256_hex, ChatRequest, GatewayError};
use bench_core::harness::{ExecLimits, Harness, ToolchainRegistry};
use bench_core::metrics::{emit_report, PassRateMatrix, ReportFormat};
use bench_core::pipeline::{read_results, to_jsonl_line, Approach, ExperimentPlan, Pipeline, TranslationAttempt};
use bench_core::prompting::TemplateSet;
use bench_core::quality;
use bench_core::SubjectLanguage;
use serde_json::json;

use crate::backend::build_gateway;
use crate::{BackendArgs, QualityArgs, RunArgs};

pub const RUN_MANIFEST: &str = "run_manifest.json";

/// Printed as `error[kind]: message`.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
        }
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        Self::new("io", format!("{}: {e}", path.display()))
    }

    pub fn gateway(e: GatewayError) -> Self {
        let kind = match e {
            GatewayError::AuthMissing(_) => "auth",
            GatewayError::FixtureMiss { .. } => "fixture_miss",
            _ => "gateway",
        };
        Self::new(kind, e)
    }
}

type CliResult = Result<(), CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, text: &str) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn registry(path: Option<&Path>) -> Result<ToolchainRegistry, CliError> {
    match path {
        Some(p) => ToolchainRegistry::load(p).map_err(|e| CliError::new("config", e)),
        None => Ok(ToolchainRegistry::default()),
    }
}

fn seconds(s: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(s)
        .ok()
        .filter(|d| !d.is_zero())
        .ok_or_else(|| CliError::new("usage", format!("invalid deadline {s}")))
}

pub struct ValidateOptions {
    pub root: PathBuf,
    pub repair: bool,
    pub write: bool,
    pub out: Option<PathBuf>,
    pub reports: Option<PathBuf>,
    pub toolchains: Option<PathBuf>,
    pub deadline: Option<f64>,
}

pub fn corpus_validate(opts: ValidateOptions) -> CliResult {
    let mut limits = ExecLimits::default();
    if let Some(d) = opts.deadline {
        limits.wall_deadline = seconds(d)?;
    }
    let harness = Harness::new(registry(opts.toolchains.as_deref())?, limits);
    let corpus = corpus::load_manifest(&opts.root).map_err(|e| CliError::new("corpus", e))?;
    if let Some(l) = corpus.unregistered_languages(&harness).first() {
        return Err(CliError::new("config", format!("no toolchain registered for `{l}`")));
    }

    let mut reports = Vec::with_capacity(corpus.samples.len());
    for sample in &corpus.samples {
        let report = corpus::validate_sample(sample, &harness).map_err(|e| CliError::new("harness", e))?;
        let summary = match &report.status {
            ValidationStatus::Checked { .. } => format!(
                "exact={} prefix_repairable={} mismatch={}",
                report.count(ValidationVerdict::Exact),
                report.count(ValidationVerdict::PrefixRepairable),
                report.count(ValidationVerdict::Mismatch)
            ),
            ValidationStatus::SourceUncompilable { .. } => "source uncompilable".to_string(),
            ValidationStatus::ExecutionTimeout { test_index } => format!("timed out on test {test_index}"),
        };
        println!("{}\t{}\t{summary}", sample.sample_id, sample.language);
        reports.push(report);
    }
    if let Some(path) = &opts.reports {
        write(
            path,
            &(serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"),
        )?;
    }
    if !opts.repair {
        println!("validated {} samples", reports.len());
        return Ok(());
    }

    let repaired = corpus::repair_corpus(&corpus, &reports).map_err(|e| CliError::new("corpus", e))?;
    for ex in &repaired.excluded {
        println!("excluded\t{}\t{}", ex.sample_id, ex.reason);
    }
    println!(
        "kept {} samples, excluded {}",
        repaired.samples.len(),
        repaired.excluded.len()
    );
    if opts.write {
        let dest = opts.out.as_deref().unwrap_or(&opts.root);
        corpus::write_corpus(&repaired, dest).map_err(|e| CliError::new("corpus", e))?;
        println!("wrote {}", dest.display());
    }
    Ok(())
}

pub fn doctor(toolchains: Option<&Path>) -> CliResult {
    let reg = registry(toolchains)?;
    let mut missing = Vec::new();
    for (lang, version) in reg.probe_versions() {
        match version {
            Ok(v) => println!("{lang}: {v}"),
            Err(e) => {
                println!("{lang}: missing ({e})");
                missing.push(lang.to_string());
            }
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(
            "toolchain",
            format!("unavailable: {}", missing.join(", ")),
        ))
    }
}

fn apply_backend_args(cfg: &mut RunConfig, args: &BackendArgs) -> CliResult {
    if let Some(b) = &args.backend {
        cfg.backend = b.parse().map_err(|e| CliError::new("usage", e))?;
    }
    if let Some(f) = &args.fixtures {
        cfg.fixtures = Some(f.clone());
    }
    if args.record {
        cfg.record = true;
    }
    if let Some(s) = &args.script {
        cfg.script = Some(s.clone());
    }
    if let Some(m) = &args.model {
        cfg.model.model_id = m.clone();
    }
    if let Some(t) = args.temperature {
        cfg.model.temperature = t;
    }
    if let Some(m) = args.max_output {
        cfg.model.max_output = m;
    }
    Ok(())
}

fn merge_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p).map_err(|e| CliError::new("config", e))?,
        None => RunConfig::default(),
    };
    if let Some(c) = &args.corpus {
        cfg.corpus_root = Some(c.clone());
    }
    if !args.approaches.is_empty() {
        cfg.approaches = args
            .approaches
            .iter()
            .map(|a| a.parse::<Approach>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::new("usage", e))?;
    }
    if !args.targets.is_empty() {
        cfg.targets = args
            .targets
            .iter()
            .map(|t| t.parse::<SubjectLanguage>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::new("usage", e))?;
    }
    apply_backend_args(&mut cfg, &args.backend)?;
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    if let Some(r) = &args.report {
        cfg.report = Some(r.clone());
    }
    if let Some(j) = args.jobs {
        cfg.jobs = Some(j);
    }
    if let Some(n) = args.max_repair_iters {
        cfg.repair.max_iterations = n;
    }
    if args.no_repair {
        cfg.repair_enabled = false;
    }
    if let Some(d) = args.deadline {
        cfg.limits.wall_deadline = seconds(d)?;
    }
    if let Some(t) = &args.toolchains {
        cfg.toolchains = Some(t.clone());
    }
    if let Some(t) = &args.template_dir {
        cfg.template_dir = Some(t.clone());
    }
    cfg.repair.validate().map_err(|e| CliError::new("config", e))?;
    Ok(cfg)
}

fn file_sha(path: &Path) -> Option<String> {
    std::fs::read(path).ok().map(|b| sha256_hex(&b))
}

pub fn run(args: RunArgs) -> CliResult {
    let cfg = merge_config(&args)?;
    if args.print_config {
        print!("{}", cfg.to_json());
        return Ok(());
    }
    let corpus_root = cfg
        .corpus_root
        .clone()
        .ok_or_else(|| CliError::new("config", "no corpus given (--corpus or corpus_root)"))?;

    let reg = registry(cfg.toolchains.as_deref())?;
    if let Some(t) = cfg.targets.iter().find(|t| !reg.contains(t)) {
        return Err(CliError::new(
            "config",
            format!("unknown target `{t}`: no toolchain registered"),
        ));
    }
    let harness = Harness::new(reg, cfg.limits.clone());

    let mut corpus = corpus::load_manifest(&corpus_root).map_err(|e| CliError::new("corpus", e))?;
    corpus.samples.retain(|s| {
        if s.tests.is_empty() {
            log::warn!("skipping {}: no test cases", s.sample_id);
        }
        !s.tests.is_empty()
    });

    let templates = match &cfg.template_dir {
        Some(d) => TemplateSet::load_dir(d).map_err(|e| CliError::new("config", e))?,
        None => TemplateSet::builtin(),
    };
    let gateway = build_gateway(&cfg)?;
    let mut pipeline = Pipeline::new(harness, gateway);
    pipeline.settings = cfg.model.clone();
    pipeline.templates = templates;
    pipeline.policy = cfg.repair;
    pipeline.repair_enabled = cfg.repair_enabled;

    let plan = ExperimentPlan {
        approaches: cfg.approaches.clone(),
        targets: cfg.targets.clone(),
    };
    let jobs = cfg
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));

    if let Some(parent) = cfg.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let file = std::fs::File::create(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let mut writer = std::io::BufWriter::new(file);
    let mut sink = |a: &TranslationAttempt| {
        writer.write_all(to_jsonl_line(a).as_bytes())?;
        writer.flush()
    };
    let attempts = pipeline
        .run_experiment(&corpus, &plan, jobs, &mut sink)
        .map_err(|e| CliError::new("pipeline", e))?;
    drop(writer);

    let matrix = PassRateMatrix::from_attempts(&attempts);
    if let Some(report) = &cfg.report {
        let md = emit_report(&matrix, ReportFormat::Markdown).map_err(|e| CliError::new("metrics", e))?;
        write(report, &md)?;
    }

    let mut languages: Vec<SubjectLanguage> = cfg.targets.clone();
    languages.extend(corpus.languages());
    languages.sort();
    languages.dedup();
    let toolchains: BTreeMap<String, String> = languages
        .iter()
        .filter_map(|l| pipeline.harness.registry().get(l).map(|p| (l, p)))
        .map(|(l, p)| {
            let v = bench_core::harness::probe_version(p).unwrap_or_else(|e| format!("unavailable: {e}"));
            (l.to_string(), v)
        })
        .collect();
    let stats = pipeline.gateway.stats();
    let manifest = json!({
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "toolchains": toolchains,
        "fixtures": cfg.fixtures.as_ref().map(|p| json!({
            "path": p,
            "sha256": file_sha(p),
        })),
        "corpus": {
            "dataset_id": corpus.dataset_id,
            "samples": corpus.samples.len(),
            "excluded": corpus.excluded.len(),
        },
        "attempts": attempts.len(),
        "results_sha256": file_sha(&cfg.out),
        "gateway": {
            "live_calls": stats.live_calls,
            "replay_hits": stats.replay_hits,
            "scripted_calls": stats.scripted_calls,
        },
    });
    let manifest_path = cfg
        .out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.join(RUN_MANIFEST))
        .unwrap_or_else(|| PathBuf::from(RUN_MANIFEST));
    write(
        &manifest_path,
        &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
    )?;

    let post = bench_core::metrics::pass_at_1(&attempts, bench_core::pipeline::Phase::PostRepair);
    println!(
        "{} attempts, pass@1 {post} ({} live, {} replayed, {} scripted model calls)",
        attempts.len(),
        stats.live_calls,
        stats.replay_hits,
        stats.scripted_calls
    );
    Ok(())
}

fn load_results(path: &Path) -> Result<Vec<TranslationAttempt>, CliError> {
    read_results(&read(path)?).map_err(|e| CliError::new("results", format!("{}: {e}", path.display())))
}

pub fn report(input: &Path, format: &str, out: Option<&Path>) -> CliResult {
    let format: ReportFormat = format.parse().map_err(|e| CliError::new("usage", e))?;
    let attempts = load_results(input)?;
    let text =
        emit_report(&PassRateMatrix::from_attempts(&attempts), format).map_err(|e| CliError::new("metrics", e))?;
    match out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn quality(args: QualityArgs) -> CliResult {
    let attempts = load_results(&args.compiled)?;
    let files = quality::compiled_files(&attempts);
    if let Some(dir) = &args.export_sources {
        for (path, f) in &files {
            write(&dir.join(path), &format!("{}\n", f.code))?;
        }
        println!("exported {} files to {}", files.len(), dir.display());
    }
    let issues = match &args.issues {
        Some(p) => quality::ingest_issues(&read(p)?).map_err(|e| CliError::new("quality", e))?,
        None => Vec::new(),
    };
    let report = quality::build_report(&files, &issues, args.top);
    match &args.out {
        Some(p) => write(p, &report.density_csv())?,
        None => print!("{}", report.density_csv()),
    }
    if let Some(p) = &args.distribution {
        write(p, &report.distribution_csv())?;
    }
    if args.issues.is_some() {
        print!("{}", report.top_messages_markdown());
    }
    Ok(())
}

pub fn gateway_ping(args: &BackendArgs, prompt: &str) -> CliResult {
    let mut cfg = RunConfig::default();
    apply_backend_args(&mut cfg, args)?;
    let gateway = build_gateway(&cfg)?;
    let request = ChatRequest::new(prompt, &cfg.model).map_err(CliError::gateway)?;
    let response = gateway.complete(&request).map_err(CliError::gateway)?;
    println!(
        "backend={} digest={} truncated={}",
        serde_json::to_value(response.backend)
            .expect("kind serializes")
            .as_str()
            .unwrap_or("?"),
        response.request_digest,
        response.truncated
    );
    println!("{}", response.raw_text);
    Ok(())
}
