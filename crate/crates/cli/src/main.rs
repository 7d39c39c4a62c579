mod backend;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Specification-driven code translation benchmark.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus maintenance.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Print the resolved toolchain versions.
    Doctor {
        #[arg(long)]
        toolchains: Option<PathBuf>,
    },
    /// Translate, compile, repair and test a corpus.
    Run(Box<RunArgs>),
    /// Render pass@1 tables from a results file.
    Report(ReportArgs),
    /// NCLOC, issue densities and top messages for compiled translations.
    Quality(QualityArgs),
    /// Model gateway utilities.
    #[command(subcommand)]
    Gateway(GatewayCommand),
}

#[derive(Debug, Subcommand)]
enum CorpusCommand {
    /// Run every sample's original program against its tests.
    Validate {
        root: PathBuf,
        /// Rewrite prefix-matching truncated outputs and exclude failing samples.
        #[arg(long)]
        repair: bool,
        /// Write the repaired corpus (in place unless --out is given).
        #[arg(long, requires = "repair")]
        write: bool,
        #[arg(long, requires = "write")]
        out: Option<PathBuf>,
        /// Also write the validation reports as JSON.
        #[arg(long)]
        reports: Option<PathBuf>,
        #[arg(long)]
        toolchains: Option<PathBuf>,
        /// Per-test deadline in seconds.
        #[arg(long)]
        deadline: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
enum GatewayCommand {
    /// Send one short request through the configured backend.
    Ping {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, default_value = "Reply with the single word: pong")]
        prompt: String,
    },
}

#[derive(Debug, Clone, Args)]
struct BackendArgs {
    /// live, replay or scripted
    #[arg(long)]
    backend: Option<String>,
    /// JSON-lines fixture file (read for replay, appended with --record).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Append every non-replayed completion to the fixture file.
    #[arg(long)]
    record: bool,
    /// Rules file for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_output: Option<u32>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// source, spec, spec+source (comma-separated or repeated)
    #[arg(long = "approach", value_delimiter = ',')]
    approaches: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    #[command(flatten)]
    backend: BackendArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a markdown report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    max_repair_iters: Option<u32>,
    #[arg(long)]
    no_repair: bool,
    /// Per-test wall-clock deadline in seconds.
    #[arg(long)]
    deadline: Option<f64>,
    #[arg(long)]
    toolchains: Option<PathBuf>,
    #[arg(long)]
    template_dir: Option<PathBuf>,
    /// Print the merged configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QualityArgs {
    /// Results file; only successfully compiled code is considered.
    #[arg(long)]
    compiled: PathBuf,
    /// Analyzer export (bare issue array or an object with `issues`).
    #[arg(long)]
    issues: Option<PathBuf>,
    /// Write the compiled files here, laid out for the analyzer.
    #[arg(long)]
    export_sources: Option<PathBuf>,
    /// Per-cell density CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-file density CSV.
    #[arg(long)]
    distribution: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    top: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Corpus(CorpusCommand::Validate {
            root,
            repair,
            write,
            out,
            reports,
            toolchains,
            deadline,
        }) => commands::corpus_validate(commands::ValidateOptions {
            root,
            repair,
            write,
            out,
            reports,
            toolchains,
            deadline,
        }),
        Command::Doctor { toolchains } => commands::doctor(toolchains.as_deref()),
        Command::Run(args) => commands::run(*args),
        Command::Report(args) => commands::report(&args.input, &args.format, args.out.as_deref()),
        Command::Quality(args) => commands::quality(args),
        Command::Gateway(GatewayCommand::Ping { backend, prompt }) => commands::gateway_ping(&backend, &prompt),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind, e.message);
            ExitCode::FAILURE
        }
    }
}
