//! `fracbvp`: analyze, certify, and solve nonlocal fractional boundary value
//! problems described by a JSON problem file.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical non-convergence,
//! 4 certificate failure (certify only).

mod commands;
mod config;
mod report;

use clap::{Args, Parser, Subcommand};
use config::ProblemConfig;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    NonConvergence(String),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "{msg}"),
            CliError::NonConvergence(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(2),
            CliError::NonConvergence(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}

/// Quadrature overrides shared by every command that integrates.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct QuadFlags {
    /// Gauss points per panel.
    #[arg(long, global = true)]
    pub quad_order: Option<usize>,
    /// Panels per segment between breakpoints.
    #[arg(long, global = true)]
    pub quad_panels: Option<usize>,
    /// Relative tolerance for refined integrals.
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
}

#[derive(Parser)]
#[command(
    name = "fracbvp",
    version,
    about = "Nonlocal fractional boundary value problems: kernel analysis, \
             spectral bounds, existence certificates, and positive solutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    quad: QuadFlags,
}

#[derive(Subcommand)]
enum Command {
    /// Report Lambda, the hypotheses, the tau sandwich, and the spectral
    /// radius estimate as JSON.
    Analyze { config: PathBuf },
    /// Check the existence conditions and emit a certificate (exit 4 when
    /// the verdict is negative).
    Certify { config: PathBuf },
    /// Solve for a positive solution by damped fixed-point iteration.
    Solve {
        config: PathBuf,
        /// Fixed-point residual target.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Initial damping factor in (0, 1].
        #[arg(long)]
        damping: Option<f64>,
        /// Grid size before breakpoints are merged in.
        #[arg(long)]
        grid: Option<usize>,
        /// Where to write the solution table (CSV, columns t,u).
        #[arg(long, default_value = "u.csv")]
        output: PathBuf,
        /// Where to write the solve report (JSON).
        #[arg(long, default_value = "report.json")]
        report: PathBuf,
    },
    /// Tabulate the kernels on a grid as CSV (columns t,s,H,G,Phi,rhoPhi).
    Greens {
        config: PathBuf,
        #[arg(long, default_value_t = 33)]
        t_points: usize,
        #[arg(long, default_value_t = 33)]
        s_points: usize,
        /// Write the table here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the seeded randomized invariant suites.
    Selftest {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn write_file(path: &PathBuf, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Analyze { config } => {
            let cfg = ProblemConfig::load(&config)?;
            print!("{}", commands::analyze(&cfg, &cli.quad)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { config } => {
            let cfg = ProblemConfig::load(&config)?;
            let (json, verdict) = commands::certify(&cfg, &cli.quad)?;
            print!("{json}");
            Ok(if verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            })
        }
        Command::Solve {
            config,
            tol,
            max_iter,
            damping,
            grid,
            output,
            report,
        } => {
            let cfg = ProblemConfig::load(&config)?;
            let flags = commands::SolveFlags {
                tol,
                max_iter,
                damping,
                grid,
            };
            let artifacts = commands::solve(&cfg, &cli.quad, &flags)?;
            write_file(&output, &artifacts.table_csv)?;
            write_file(&report, &artifacts.report_json)?;
            print!("{}", artifacts.report_json);
            Ok(if artifacts.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
        Command::Greens {
            config,
            t_points,
            s_points,
            output,
        } => {
            let cfg = ProblemConfig::load(&config)?;
            let table = commands::greens(&cfg, &cli.quad, t_points, s_points)?;
            match output {
                Some(path) => write_file(&path, &table)?,
                None => print!("{table}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest { cases, seed } => {
            let (text, all_ok) = commands::selftest(cases, seed);
            print!("{text}");
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
