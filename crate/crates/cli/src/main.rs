use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bogp_cli::commands::{cmd_baseline, cmd_optimize, cmd_pca, cmd_report};
use bogp_cli::{Failure, Overrides, RunConfig, EXIT_INPUT, EXIT_INTERNAL};

/// BO-GP tuned tree ensembles for IIoT intrusion detection.
#[derive(Parser, Debug)]
#[command(name = "bogp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Project the scaled data onto two principal components (pca.csv).
    Pca,
    /// Train the untuned DT, Bagging, Boosting and RUSBoosting models.
    Baseline,
    /// Tune the tree and ensemble spaces with GP-EI Bayesian optimization.
    Optimize,
    /// Merge baseline and optimized results into the final table.
    Report,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Plain-text `key = value` run configuration; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Telemetry CSV with a header row.
    #[arg(long, global = true, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Cross-validation folds used by the tuning objective.
    #[arg(long, global = true, value_name = "K")]
    folds: Option<usize>,
    /// Objective evaluations per tuning run.
    #[arg(long, global = true, value_name = "N")]
    budget: Option<usize>,
    /// Held-out share of each class.
    #[arg(long, global = true, value_name = "F")]
    test_fraction: Option<f64>,
    /// Use the generated stand-in dataset instead of --data.
    #[arg(long, global = true)]
    synthetic: bool,
    /// Record per-trial wall time in the trace files (breaks byte-identical reruns).
    #[arg(long, global = true)]
    timing: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(Failure::input("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::internal(format!("thread pool: {e}")))?;
    }
    let flags = Overrides {
        data: c.data.clone(),
        out: c.out.clone(),
        seed: c.seed,
        folds: c.folds,
        budget: c.budget,
        test_fraction: c.test_fraction,
        synthetic: c.synthetic,
        timing: c.timing,
    };
    let cfg = RunConfig::load(c.config.as_deref(), &flags)?;
    let mut stdout = std::io::stdout().lock();
    let result = match cli.command {
        Command::Pca => cmd_pca(&cfg, &mut stdout),
        Command::Baseline => cmd_baseline(&cfg, &mut stdout),
        Command::Optimize => cmd_optimize(&cfg, &mut stdout),
        Command::Report => cmd_report(&cfg, &mut stdout),
    };
    let _ = stdout.flush();
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let level = if cli.common.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(f)) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL as u8),
    }
}
