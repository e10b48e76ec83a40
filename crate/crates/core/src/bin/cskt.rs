use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use cskt::config::PipelineConfig;
use cskt::pipeline::{self, PipelineError};
use cskt::validate::ValidateOptions;

#[derive(Parser)]
#[command(name = "cskt", version, about = "Build commonsense infilling and relation-prediction datasets")]
struct Cli {
    /// Pipeline config, TOML or `.json`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Machine-readable output on stdout and errors on stderr.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus files to sentences.jsonl.
    Ingest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sentences to tuples.jsonl.
    Infer {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tuples to shards and manifest.
    Build {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute and print dataset statistics.
    Stats {
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Check every invariant of an emitted dataset.
    Validate {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Fraction of CSTI examples re-derived from the tuples.
        #[arg(long, default_value_t = 1.0)]
        sample_rate: f64,
        #[arg(long)]
        skip_hashes: bool,
    },
    /// ingest, infer and build in one go.
    Run,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.apply_env();
    cfg.validate()?;
    Ok(cfg)
}

fn print(json_mode: bool, value: serde_json::Value, text: String) {
    if json_mode {
        println!("{value}");
    } else {
        println!("{text}");
    }
}

fn execute(cli: &Cli) -> Result<(), PipelineError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Ingest { out } => {
            let n = pipeline::cmd_ingest(&cfg, out.as_deref())?;
            print(cli.json, json!({ "sentences": n }), format!("{n} sentences"));
        }
        Command::Infer { input, out } => {
            let n = pipeline::cmd_infer(&cfg, input.as_deref(), out.as_deref())?;
            print(cli.json, json!({ "tuples": n }), format!("{n} tuples"));
        }
        Command::Build { input, out } => {
            let m = pipeline::cmd_build(&cfg, input.as_deref(), out.as_deref())?;
            print(
                cli.json,
                json!({ "examples": m.total_examples, "shards": m.shards.len(), "dataset_sha256": m.dataset_sha256 }),
                format!("{} examples in {} shards, sha256 {}", m.total_examples, m.shards.len(), m.dataset_sha256),
            );
        }
        Command::Run => {
            let m = pipeline::cmd_run(&cfg)?;
            print(
                cli.json,
                json!({ "examples": m.total_examples, "shards": m.shards.len(), "dataset_sha256": m.dataset_sha256 }),
                format!("{} examples in {} shards, sha256 {}", m.total_examples, m.shards.len(), m.dataset_sha256),
            );
        }
        Command::Stats { input } => {
            let dir = input.clone().unwrap_or_else(|| cfg.out_dir.clone());
            let stats = pipeline::cmd_stats(&dir)?;
            let value = serde_json::to_value(&stats).expect("stats serialize");
            let pretty = serde_json::to_string_pretty(&value).expect("stats serialize");
            print(cli.json, value, pretty);
        }
        Command::Validate { input, sample_rate, skip_hashes } => {
            let dir = input.clone().unwrap_or_else(|| cfg.out_dir.clone());
            let opts = ValidateOptions {
                csti_sample_rate: *sample_rate,
                check_hashes: !skip_hashes,
                tuples: None,
            };
            let report = pipeline::cmd_validate(&dir, &opts)?;
            let text = if report.is_ok() {
                format!("ok: {} csti, {} csrp examples", report.csti_examples, report.csrp_examples)
            } else {
                report.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
            };
            print(cli.json, serde_json::to_value(&report).expect("report serializes"), text);
            if !report.is_ok() {
                return Err(PipelineError::ValidationFailed(report.violations.len()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let result = match cli.threads {
        Some(t) => pipeline::with_threads(t, || execute(&cli)),
        None => execute(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            if cli.json {
                eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string(), "exit_code": code }));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code as u8)
        }
    }
}
