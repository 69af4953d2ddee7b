#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod checks;
mod config;
mod corpus;
mod report;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use report::{RunReport, EXIT_CONFIG};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "liouville-iso", version, about = "Isoperimetric checks for singular conformal metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Directory for the report and curve files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Default tolerance for checks that do not set their own.
    #[arg(long, default_value_t = liouville_iso::iso::DEFAULT_TOL)]
    tol: f64,
    /// Seed for randomized suites.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of cases in randomized suites.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a curated oracle suite: example1, example2, example3, cones or all.
    Corpus {
        #[arg(default_value = "all")]
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

fn pool(n: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?)
}

fn write_json(path: &std::path::Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(config: PathBuf, common: Common) -> anyhow::Result<i32> {
    if !(common.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return Ok(EXIT_CONFIG);
    }
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return Ok(EXIT_CONFIG);
        }
    };
    let prepared = match config::load(&text) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {}: {msg}", config.display());
            return Ok(EXIT_CONFIG);
        }
    };
    let ctx = checks::Context::new(&prepared, common.tol);
    let mut outcomes: Vec<_> = pool(common.parallel)?.install(|| {
        prepared
            .checks
            .par_iter()
            .enumerate()
            .map(|(i, c)| checks::run_check(&ctx, i, c))
            .collect()
    });
    let code = report::exit_code(outcomes.iter().map(|o| &o.status));
    let dir = common.out.or_else(|| prepared.output.dir.clone());
    if let Some(dir) = &dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        report::write_tables(dir, &mut outcomes)?;
    }
    for o in &outcomes {
        let msg = o.message.as_deref().map(|m| format!(": {m}")).unwrap_or_default();
        eprintln!("check {} {}: {:?}{msg}", o.index, o.kind, o.status);
    }
    let rep = RunReport {
        command: "run",
        seed: common.seed,
        tol: common.tol,
        metric: prepared.metric.kind_name().to_string(),
        checks: outcomes,
        exit_code: code,
    };
    match &dir {
        Some(dir) => write_json(&dir.join(&prepared.output.report), &rep)?,
        None => println!("{}", serde_json::to_string_pretty(&rep)?),
    }
    Ok(code)
}

#[derive(serde::Serialize)]
struct CorpusReport<'a> {
    command: &'static str,
    suite: &'a str,
    seed: u64,
    cases: usize,
    rows: &'a [corpus::Row],
    exit_code: i32,
}

fn run_corpus(name: String, common: Common) -> anyhow::Result<i32> {
    if !corpus::is_known(&name) {
        eprintln!(
            "error: unknown corpus '{name}' (expected one of {}, all)",
            corpus::SUITES.join(", ")
        );
        return Ok(EXIT_CONFIG);
    }
    let opts = corpus::Options {
        seed: common.seed,
        cases: common.cases,
        tol: common.tol,
    };
    let rows = pool(common.parallel)?.install(|| corpus::run(&name, &opts));
    corpus::print_table(&rows);
    let code = if rows.iter().all(|r| r.pass) { report::EXIT_PASS } else { report::EXIT_FAIL };
    println!(
        "{} of {} rows pass (seed {}, {} cases)",
        rows.iter().filter(|r| r.pass).count(),
        rows.len(),
        common.seed,
        common.cases
    );
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        let rep = CorpusReport {
            command: "corpus",
            suite: &name,
            seed: common.seed,
            cases: common.cases,
            rows: &rows,
            exit_code: code,
        };
        write_json(&dir.join("corpus.json"), &rep)?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run { config, common } => run(config, common),
        Command::Corpus { name, common } => run_corpus(name, common),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
