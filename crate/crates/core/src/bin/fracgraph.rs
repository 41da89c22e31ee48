use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use fracgraph::cli::{configure_threads, execute, exit_status_for, parse_config, with_outputs, Command};
use fracgraph::schrodinger::Branch;

#[derive(Clone, Copy, ValueEnum)]
enum CommandArg {
    Validate,
    Kernel,
    Solve,
    Check,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Pos,
    Neg,
}

/// Fractional Laplacians and signed Schrödinger solutions on weighted graphs.
#[derive(Parser)]
#[command(name = "fracgraph", version)]
struct Args {
    command: CommandArg,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a configuration entry, e.g. `solver.tol_residual=1e-10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Restrict `solve` to one branch.
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// Output directory, overriding `outputs`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    configure_threads();
    let command = match args.command {
        CommandArg::Validate => Command::Validate,
        CommandArg::Kernel => Command::Kernel,
        CommandArg::Solve => Command::Solve,
        CommandArg::Check => Command::Check,
    };
    let mut cfg = match parse_config(&args.config, &args.overrides) {
        Ok(cfg) => with_outputs(cfg, args.out),
        Err(err) => {
            eprintln!("fracgraph: {err}");
            return ExitCode::from(exit_status_for(&err).code() as u8);
        }
    };
    if let Some(b) = args.branch {
        cfg.solve.branch = Some(match b {
            BranchArg::Pos => Branch::Positive,
            BranchArg::Neg => Branch::Negative,
        });
    }
    ExitCode::from(execute(command, &cfg).code() as u8)
}
