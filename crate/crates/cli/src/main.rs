use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qosc_cli::commands::{cmd_derive, cmd_run, cmd_solve, cmd_verify, describe_derive, describe_solve};
use qosc_cli::{init_threads, CliError, Scenario};

#[derive(Parser)]
#[command(version, about = "Exact wave functions for a charged oscillator with time-dependent mass")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Replace a tolerance, e.g. `oracle_fidelity=1e-4`. Repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VALUE")]
    tol_override: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the coefficient chain into derived.csv.
    Derive(Common),
    /// Build closed-form and pipeline states, write dumps and solve.csv.
    Solve(Common),
    /// Check the closed-form dumps against direct propagation; writes verify.csv.
    Verify(Common),
    /// Run the scenario's `commands` list.
    Run(Common),
}

fn load(c: &Common) -> Result<Scenario, CliError> {
    let mut sc = Scenario::from_path(&c.scenario)?;
    for o in &c.tol_override {
        sc.tolerances.apply_override(o)?;
    }
    Ok(sc)
}

fn execute(cmd: Cmd) -> Result<bool, CliError> {
    init_threads(std::env::var("QOSC_THREADS").ok().as_deref())?;
    match cmd {
        Cmd::Derive(c) => println!("{}", describe_derive(&cmd_derive(&load(&c)?, &c.out)?)),
        Cmd::Solve(c) => println!("{}", describe_solve(&cmd_solve(&load(&c)?, &c.out)?)),
        Cmd::Verify(c) => {
            let r = cmd_verify(&load(&c)?, &c.out)?;
            println!("{}", r.summary());
            return Ok(r.passed());
        }
        Cmd::Run(c) => {
            let r = cmd_run(&load(&c)?, &c.out, |line| println!("{line}"))?;
            return Ok(r.is_none_or(|r| r.passed()));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    // clap's own usage exit code would collide with the mixing-angle code
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(5),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
