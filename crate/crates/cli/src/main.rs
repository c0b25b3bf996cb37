//! The `trailbench` pipeline: generate a corpus, run an agent over it,
//! score the transcripts, and render summaries.
//!
//! Each stage writes into its own subdirectory (`cases/`, `reports/`,
//! `summary/`) so outputs stay independently inspectable and diffable.
//! Exit code 0 means the stage completed, possibly with warnings on
//! standard error; nonzero means the stage itself failed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use trailbench_core::eval::{
    evaluate_corpus, read_evaluation, render_csv, render_markdown, write_summary, EvalOptions,
    TriageMode, DEFAULT_BETA, DEFAULT_K_MIN, DEFAULT_TAU,
};
use trailbench_core::harness::{run_corpus, Limits, ProcessEndpoint, RunSummary};
use trailbench_core::variation::{generate_corpus, DistributionConfig};

#[derive(Parser)]
#[command(
    name = "trailbench",
    version,
    about = "Incident-investigation benchmark: corpus generation, agent runs, scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a case corpus under `<out>/cases/` with a manifest.
    Generate {
        /// TOML distribution config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Root seed; every case seed is derived from it and the case id.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an agent command over every case, writing `<out>/reports/`.
    Run {
        /// Corpus directory (the one holding `corpus.json`).
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Tool-call budget per case (default 50; env
        /// TRAILBENCH_MAX_TOOL_CALLS overrides the default, the flag wins).
        #[arg(long)]
        max_tool_calls: Option<usize>,
        /// Per-case wall-clock budget in seconds (default 120; env
        /// TRAILBENCH_TIMEOUT_SECS overrides the default, the flag wins).
        #[arg(long)]
        timeout_secs: Option<u64>,
        /// Parallel sessions; 0 means one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Agent command line, given after `--`. Spawned once per case.
        #[arg(last = true, required = true)]
        agent: Vec<String>,
    },
    /// Score a run against its corpus, writing `<out>/summary/`.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        /// Reports directory produced by `run` (`<run-out>/reports`).
        #[arg(long)]
        reports: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Recall weight of the triage F-score.
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        /// Similarity threshold for claim/finding matching (strict >).
        #[arg(long, default_value_t = DEFAULT_TAU)]
        tau: f64,
        /// Valid claims required before a malicious verdict stands.
        #[arg(long, default_value_t = DEFAULT_K_MIN)]
        k_min: usize,
        /// Depth-curve thresholds, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![3, 5, 7])]
        n_thresholds: Vec<usize>,
        /// Lead with evidence-validated triage numbers instead of raw ones.
        #[arg(long)]
        validated: bool,
        /// TOML file overriding the expected-tool table, mapping category
        /// slugs to tool-name lists.
        #[arg(long)]
        expected_tools: Option<PathBuf>,
    },
    /// Render an existing summary to markdown or CSV.
    Report {
        /// Summary directory written by `evaluate` (holds `summary.json`).
        #[arg(long)]
        summary: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Csv,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli.command) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Generate { config, seed, out } => cmd_generate(config.as_deref(), seed, &out),
        Command::Run { corpus, out, max_tool_calls, timeout_secs, jobs, agent } => {
            cmd_run(&corpus, &out, max_tool_calls, timeout_secs, jobs, &agent)
        }
        Command::Evaluate {
            corpus,
            reports,
            out,
            beta,
            tau,
            k_min,
            n_thresholds,
            validated,
            expected_tools,
        } => {
            let mut options = EvalOptions {
                beta,
                tau,
                k_min,
                n_thresholds,
                mode: if validated { TriageMode::Validated } else { TriageMode::Raw },
                ..EvalOptions::default()
            };
            if let Some(path) = expected_tools {
                options.expected_tools = load_expected_tools(&path)?;
            }
            cmd_evaluate(&corpus, &reports, &out, &options)
        }
        Command::Report { summary, format, out } => cmd_report(&summary, format, out.as_deref()),
    }
}

fn cmd_generate(config: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let config = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str::<DistributionConfig>(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => DistributionConfig::default(),
    };
    let manifest = generate_corpus(&config, seed, out)
        .context("corpus generation failed")?;
    println!(
        "generated {} cases under {} (rejected attempts: {}, swaps dropped: {})",
        manifest.cases.len(),
        out.join("cases").display(),
        manifest.stats.rejected_attempts,
        manifest.stats.swaps_dropped,
    );
    Ok(())
}

fn cmd_run(
    corpus: &Path,
    out: &Path,
    max_tool_calls: Option<usize>,
    timeout_secs: Option<u64>,
    jobs: usize,
    agent: &[String],
) -> Result<()> {
    let mut limits = Limits::default().with_env_overrides();
    if let Some(n) = max_tool_calls {
        limits.max_tool_calls = n;
    }
    if let Some(n) = timeout_secs {
        limits.timeout_secs = n;
    }
    if limits.max_tool_calls == 0 || limits.timeout_secs == 0 {
        bail!("limits must be positive (max_tool_calls {}, timeout_secs {})",
            limits.max_tool_calls, limits.timeout_secs);
    }

    let reports_dir = out.join("reports");
    let argv = agent.to_vec();
    let summary = run_corpus(corpus, &reports_dir, limits, jobs, move |_case| {
        ProcessEndpoint::spawn(&argv).map(|e| Box::new(e) as _)
    })
    .context("corpus run failed")?;

    if summary.cases == 0 {
        bail!("corpus {} lists no cases", corpus.display());
    }
    let body = serde_json::to_string_pretty(&summary)? + "\n";
    fs::write(reports_dir.join("run_summary.json"), body)?;
    print_run_summary(&summary, &reports_dir);
    Ok(())
}

fn print_run_summary(summary: &RunSummary, reports_dir: &Path) {
    println!(
        "ran {} cases: {} reported, {} without a report, {} crashed -> {}",
        summary.cases,
        summary.reported,
        summary.no_report,
        summary.crashed,
        reports_dir.display(),
    );
    if summary.no_report > 0 || summary.crashed > 0 {
        eprintln!(
            "warning: {} sessions ended without a report and {} crashed; \
             they are recorded in their transcripts and scored accordingly",
            summary.no_report, summary.crashed,
        );
    }
}

fn load_expected_tools(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading expected-tool table {}", path.display()))?;
    toml::from_str(&text)
        .with_context(|| format!("parsing expected-tool table {}", path.display()))
}

fn cmd_evaluate(
    corpus: &Path,
    reports: &Path,
    out: &Path,
    options: &EvalOptions,
) -> Result<()> {
    let evaluation = evaluate_corpus(corpus, reports, options).context("evaluation failed")?;
    if !evaluation.missing_transcripts.is_empty() {
        eprintln!(
            "warning: {} of {} cases had no transcript under {}; scored as no-report: {}",
            evaluation.missing_transcripts.len(),
            evaluation.overall.cases,
            reports.display(),
            evaluation.missing_transcripts.join(", "),
        );
    }
    let summary_dir = out.join("summary");
    write_summary(&summary_dir, &evaluation).context("writing summary failed")?;

    let headline = match options.mode {
        TriageMode::Raw => evaluation.overall.m1_raw.f_beta,
        TriageMode::Validated => evaluation.overall.m1_validated.f_beta,
    };
    let headline = match headline {
        Some(v) => format!("{v:.3}"),
        None => "undefined".to_string(),
    };
    println!(
        "evaluated {} cases (beta {}, tau {}): headline triage F = {} -> {}",
        evaluation.overall.cases,
        options.beta,
        options.tau,
        headline,
        summary_dir.display(),
    );
    Ok(())
}

fn cmd_report(summary: &Path, format: Format, out: Option<&Path>) -> Result<()> {
    let evaluation = read_evaluation(summary)
        .with_context(|| format!("reading summary under {}", summary.display()))?;
    let rendered = match format {
        Format::Md => render_markdown(&evaluation),
        Format::Csv => render_csv(&evaluation),
    };
    match out {
        Some(path) => fs::write(path, rendered)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(())
}
