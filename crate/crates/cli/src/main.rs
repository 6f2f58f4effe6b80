use std::process::ExitCode;

use clap::Parser;
use wpcf_cli::args::{Cli, Command};
use wpcf_cli::{cdf, optimize, validate, CliError};

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Optimize(args) => {
            let m = optimize::run_optimize(&args)?;
            let infeasible = m
                .records
                .iter()
                .flat_map(|r| &r.schemes)
                .filter(|s| s.status == wpcf_core::SolveStatus::InfeasibleAtZero)
                .count();
            let capped = m
                .records
                .iter()
                .flat_map(|r| &r.schemes)
                .filter(|s| s.status == wpcf_core::SolveStatus::IterationCap)
                .count();
            println!(
                "{} setups written to {} ({infeasible} infeasible at zero, {capped} stopped at the iteration cap)",
                m.records.len(),
                args.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate(args) => {
            let report = validate::run_validate(&args)?;
            println!(
                "{:<3} {:<24} {:>14} {:>14} {:>8}",
                "q", "index", "closed", "estimate", "|z|"
            );
            for c in &report.checks {
                println!(
                    "{:<3} {:<24} {:>14.6e} {:>14.6e} {:>8.3}",
                    c.quantity, c.index, c.closed.re, c.estimate.re, c.z
                );
            }
            let verdict = if report.passed() { "PASS" } else { "FAIL" };
            println!(
                "{verdict}: {} checks, max |z| = {:.3}",
                report.checks.len(),
                report.max_abs_z()
            );
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Cdf(args) => {
            let rows = cdf::run_cdf(&args)?;
            print!("{}", cdf::summary_csv(&rows));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
