use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use renyi_harness::commands::{write_coeffs, write_locallimit, write_monotonicity, write_verify};
use renyi_harness::{
    richardson_summary, run_coeffs, run_locallimit, run_monotonicity, run_verify, Experiment, HarnessError,
    CONFIG_HELP,
};

/// Compare Renyi entropy expansions of normalized sums with numerically
/// inverted densities.
#[derive(Parser)]
#[command(name = "renyi-clt", version, after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficient table per Renyi order: b, B1, A1, A2, a1, a2, A_tilde, B_tilde, r0, verdict.
    #[command(after_help = CONFIG_HELP)]
    Coeffs(RunArgs),
    /// Measured entropies against series predictions, one row per (n, r).
    #[command(after_help = CONFIG_HELP)]
    Verify(RunArgs),
    /// Forward differences of N_r(Z_n), empirical n0 and the predicted verdict.
    #[command(after_help = CONFIG_HELP)]
    Monotonicity(RunArgs),
    /// Weighted sup distance between p_n and the Edgeworth density, with a log-log slope.
    #[command(after_help = CONFIG_HELP)]
    Locallimit(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment description.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides the config's `output`, stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write every computed density grid as CSV into this directory.
    #[arg(long, value_name = "DIR")]
    dump_density: Option<PathBuf>,
}

fn sink(args: &RunArgs, exp: &Experiment) -> Result<Box<dyn Write>, HarnessError> {
    match args.out.as_ref().or(exp.output.as_ref()) {
        Some(path) => {
            let file = File::create(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let (Command::Coeffs(args) | Command::Verify(args) | Command::Monotonicity(args) | Command::Locallimit(args)) =
        &cli.command;
    let exp = Experiment::from_path(&args.config)?;
    let dump = args.dump_density.as_deref();
    match &cli.command {
        Command::Coeffs(_) => {
            let rows = run_coeffs(&exp)?;
            write_coeffs(&rows, sink(args, &exp)?)
        }
        Command::Verify(_) => {
            let rows = run_verify(&exp, dump)?;
            write_verify(&rows, sink(args, &exp)?)?;
            for line in richardson_summary(&exp, &rows)? {
                eprintln!("{line}");
            }
            Ok(())
        }
        Command::Monotonicity(_) => {
            let rows = run_monotonicity(&exp, dump)?;
            write_monotonicity(&rows, sink(args, &exp)?)?;
            for row in rows.iter().filter(|row| !row.verdict_match && row.forward_difference.is_none()) {
                let observed = rows
                    .iter()
                    .rev()
                    .find(|other| other.index == row.index && other.sign.is_some())
                    .and_then(|other| other.sign)
                    .unwrap_or('?');
                eprintln!(
                    "mismatch: r={} predicted {}, trailing differences have sign {observed}",
                    row.index, row.predicted
                );
            }
            Ok(())
        }
        Command::Locallimit(_) => {
            let rows = run_locallimit(&exp, dump)?;
            write_locallimit(&rows, sink(args, &exp)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("renyi-clt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
