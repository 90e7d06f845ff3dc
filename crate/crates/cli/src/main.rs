use std::path::PathBuf;
use std::process::ExitCode;

use bbm_cli::{output_dir, run_simulate, run_sweep, CliError, SimConfig, SweepConfig, EXIT_CONFIG, EXIT_VERIFY_FAILED};
use bbm_core::verify::{run_suite, Suite};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bbm", version, about = "Damped BBM simulator and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration; writes ledger.csv, snapshots/ and report.json.
    Simulate { config: PathBuf },
    /// Run a verification suite: operators, conservation, dissipation, lipschitz, picard or all.
    Verify { suite: String },
    /// Run a one- or two-parameter grid of simulations; writes summary.csv.
    Sweep { config: PathBuf },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("bbm: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match cli.command {
        Command::Simulate { config } => {
            let cfg = match SimConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let dir = output_dir(&cfg.output_dir);
            match run_simulate(&cfg, &dir) {
                Ok(report) => {
                    println!(
                        "wrote {} (final t = {}, balance residual {:.3e})",
                        dir.display(),
                        report.final_time.unwrap_or(0.0),
                        report.balance_residual.unwrap_or(0.0)
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify { suite } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => return fail(CliError::Config(e.to_string())),
            };
            let results = run_suite(suite);
            let failed = results.iter().filter(|c| !c.passed).count();
            for c in &results {
                println!("{c}");
            }
            println!("{} checks, {} failed", results.len(), failed);
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY_FAILED as u8)
            }
        }
        Command::Sweep { config } => {
            let cfg = match SweepConfig::from_path(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let dir = output_dir(&cfg.output_dir);
            match run_sweep(&cfg, &dir) {
                Ok(rows) => {
                    let failed = rows.iter().filter(|r| r.status != "ok").count();
                    println!("wrote {} ({} cells, {} failed)", dir.join("summary.csv").display(), rows.len(), failed);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
    }
}
