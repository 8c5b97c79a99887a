use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use psl::{render, run_task, CliError, Overrides};

/// Exact-arithmetic curvature and Lagrangianity checker.
#[derive(Parser)]
#[command(name = "psl", version, disable_help_subcommand = true)]
struct Cli {
    /// Task kind: differential, q, certify, lift_check, sp_twist,
    /// bernstein_step, mutate, compatible, isogeny.
    kind: String,

    /// Task description, one JSON object per file.
    #[arg(long)]
    input: PathBuf,

    /// Where to write the report; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Lagrangianity route: eigen or ideal.
    #[arg(long)]
    mode: Option<String>,

    /// Seed for randomized searches.
    #[arg(long)]
    seed: Option<u64>,

    /// Search depth bound.
    #[arg(long)]
    depth: Option<usize>,

    /// Recompute the curvature with the slow repeated-application oracle
    /// and record whether it agrees.
    #[arg(long)]
    oracle: bool,
}

fn run(cli: &Cli) -> Result<Option<bool>, CliError> {
    let raw = fs::read_to_string(&cli.input)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", cli.input.display())))?;
    let task: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| CliError::Schema(format!("input is not valid JSON: {e}")))?;
    let over = Overrides {
        mode: cli.mode.clone(),
        seed: cli.seed,
        depth: cli.depth,
        oracle: cli.oracle,
    };
    let (report, verdict) = run_task(&cli.kind, &task, &over)?;
    let text = render(&report);
    match &cli.output {
        None => print!("{text}"),
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Schema(format!("cannot write {}: {e}", path.display())))?,
    }
    Ok(verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Some(false)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{}", render(&e.report()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
