use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unifield_cli::{cmd_check, cmd_derive, cmd_report, cmd_solve, exit_code, CliError, ProblemConfig};

/// Unified Lagrangian-Hamiltonian toolkit for first-order field theories.
#[derive(Debug, Parser)]
#[command(name = "unifield", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Legendre maps, canonical forms and field equations of a problem.
    Derive { config: PathBuf },
    /// Run the identity suites at seeded random points.
    Check {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        points: Option<usize>,
        /// Corrupt one expected sign to confirm the harness can fail.
        #[arg(long, hide = true)]
        inject_sign_error: bool,
    },
    /// Solve the Dirichlet problem and write the section and report files.
    Solve { config: PathBuf },
    /// Recompute the residual report of a section file.
    Report { section: PathBuf, config: PathBuf },
}

fn run(args: Args) -> Result<bool, CliError> {
    let mut stdout = std::io::stdout().lock();
    match args.command {
        Command::Derive { config } => cmd_derive(&ProblemConfig::load(&config)?, &mut stdout),
        Command::Check { config, seed, points, inject_sign_error } => {
            let cfg = ProblemConfig::load(&config)?;
            let mut opts = cfg.check_options();
            opts.seed = seed.unwrap_or(opts.seed);
            opts.points = points.unwrap_or(opts.points);
            opts.inject_sign_error = inject_sign_error;
            cmd_check(&cfg, &opts, &mut stdout)
        }
        Command::Solve { config } => cmd_solve(&ProblemConfig::load(&config)?, &mut stdout),
        Command::Report { section, config } => cmd_report(&section, &ProblemConfig::load(&config)?, &mut stdout),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("UNIFIELD_LOG")).init();
    let outcome = run(Args::parse());
    if let Err(e) = &outcome {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
