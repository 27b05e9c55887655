//! Command-line front end: verification suites, operator experiments and
//! kernel dumps driven by a TOML configuration.

mod config;
mod run;

use clap::{Parser, Subcommand};
use hankelops::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hankelops", version, about = "Hankel multiplier verification harness")]
struct Cli {
    /// Path to the experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread count (overrides auto-detection).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for reports.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Multiply every suite tolerance by this factor.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suites and write verify.json / verify.csv.
    Verify,
    /// Run the operator experiments and write operator.json / operator.csv.
    Operator,
    /// Dump kernel values at configured probes to kernel_dump.csv.
    KernelDump,
    /// List symbol presets, input generators, suites and operators.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        std::env::set_var("HANKELOPS_THREADS", n.to_string());
    }
    if !(cli.tolerance_scale > 0.0) {
        eprintln!("error: --tolerance-scale must be positive");
        return ExitCode::from(2);
    }
    if matches!(cli.command, Command::Presets) {
        run::run_presets();
        return ExitCode::SUCCESS;
    }
    let path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config is required for this command");
            return ExitCode::from(2);
        }
    };
    let cfg = match config::Config::load(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let label = cfg.label(&path);
    let result = match cli.command {
        Command::Verify => run::run_verify(&cfg, &label, &cli.out, cli.tolerance_scale),
        Command::Operator => run::run_operator(&cfg, &label, &cli.out, cli.tolerance_scale),
        Command::KernelDump => run::run_kernel_dump(&cfg, &label, &cli.out),
        Command::Presets => unreachable!(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NonConvergent(_) | Error::Singular(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
