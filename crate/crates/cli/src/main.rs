use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evolop_cli::verify::Faults;
use evolop_cli::{cmd_catalog, cmd_solve, cmd_verify};

/// Structure-preserving solvers for evolutionary systems descended from the
/// discrete mother operator.
#[derive(Parser)]
#[command(name = "evolop", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the structural identity checks and print a PASS/FAIL table.
    Verify {
        /// Only run check groups whose name contains this text.
        #[arg(long)]
        filter: Option<String>,
        /// Fault injection for testing the suite itself.
        #[arg(long, hide = true)]
        inject: Option<String>,
    },
    /// Solve a scenario file and write `<name>_energy.csv` and `<name>_snapshots.csv`.
    Solve {
        file: PathBuf,
        /// Step the Schur complement on the range of the spatial operator.
        #[arg(long)]
        reduced: bool,
        /// Directory for the CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// List catalog entries with their derivation chains.
    Catalog,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let code = match cli.command {
        Command::Verify { filter, inject } => {
            let faults = match inject.as_deref() {
                None => Faults::default(),
                Some("curl-sign") => Faults { curl_sign: true },
                Some(other) => {
                    eprintln!("unknown fault `{other}`");
                    return ExitCode::from(2);
                }
            };
            cmd_verify(filter.as_deref(), &faults, &mut stdout).unwrap_or_else(|e| {
                eprintln!("{e}");
                1
            })
        }
        Command::Solve { file, reduced, out } => match cmd_solve(&file, reduced, &out) {
            Ok(o) => {
                for p in [&o.energy, &o.snapshots].into_iter().flatten() {
                    println!("wrote {}", p.display());
                }
                if let Some(n) = o.final_norm {
                    println!("weighted norm {n:.16e}");
                }
                0
            }
            Err(e) => {
                eprintln!("{}: {e}", file.display());
                e.exit_code()
            }
        },
        Command::Catalog => cmd_catalog(&mut stdout).unwrap_or_else(|e| {
            eprintln!("{e}");
            e.exit_code()
        }),
    };
    ExitCode::from(code)
}
