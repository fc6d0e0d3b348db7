//! `allpay`: runs all-pay mechanism experiments from scenario files and
//! flags, and writes deterministic JSON results (plus CSV curves).
//!
//! Exit status: 0 on success, 2 when a checked invariant fails, 1 on bad
//! input.

mod commands;
mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scenario::{parse_count, Scenario};

#[derive(Debug)]
pub enum Failure {
    Input(String),
}

impl From<allpay_core::Error> for Failure {
    fn from(e: allpay_core::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "allpay", version, about = "All-pay mechanism experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Single-item all-pay auction.
    #[command(subcommand)]
    SingleItem(SingleItemCmd),
    /// Proportional-share mechanism for identical units.
    #[command(subcommand)]
    Psam(PsamCmd),
    /// Simultaneous item bidding.
    #[command(subcommand)]
    Simul(SimulCmd),
    /// Analytic bound kernels.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Certifies the scenario's equilibrium as epsilon-Nash.
    Verify,
}

#[derive(Subcommand, Clone, Copy)]
enum SingleItemCmd {
    /// Equilibrium welfare and price of anarchy.
    Poa,
    /// Revenue, maximum bid, and the prize-vector mechanism.
    Revenue,
}

#[derive(Subcommand, Clone, Copy)]
enum PsamCmd {
    /// Pure equilibrium and its efficiency.
    Solve,
}

#[derive(Subcommand, Clone, Copy)]
enum SimulCmd {
    /// Checks both welfare inequalities on the product equilibrium.
    Validate,
}

#[derive(Subcommand, Clone, Copy)]
enum BoundsCmd {
    /// Multi-start minimization of H at a fixed product of the G_i.
    Prop1,
    /// R(F, v) on the extremal family.
    Rfv,
    /// Bound on the price of anarchy over a lambda grid.
    Lambda,
}

#[derive(Args)]
struct Opts {
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples; `1e6` is accepted.
    #[arg(long, global = true, value_parser = parse_count)]
    samples: Option<u64>,
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Results JSON (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// CSV file for curves.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true)]
    v: Option<f64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Prize vector, e.g. `0.8,0.2`.
    #[arg(long, global = true, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    min: Option<f64>,
    #[arg(long, global = true)]
    max: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true)]
    target: Option<f64>,
    #[arg(long, global = true)]
    starts: Option<usize>,
}

impl Opts {
    fn into_scenario(self) -> Scenario {
        Scenario {
            seed: self.seed,
            samples: self.samples,
            grid_size: self.grid,
            workers: self.workers,
            out: self.out,
            tol: self.tol,
            csv: self.csv,
            v: self.v,
            n: self.n,
            k: self.k,
            m: self.m,
            q: self.q,
            values: self.values,
            lambda: self.lambda,
            lambda_min: self.min,
            lambda_max: self.max,
            steps: self.steps,
            target: self.target,
            starts: self.starts,
            ..Scenario::default()
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let base = match &cli.opts.scenario {
        Some(path) => scenario::load(path)?,
        None => Scenario::default(),
    };
    let s = base.overlay(cli.opts.into_scenario());
    let out = match cli.command {
        Command::SingleItem(SingleItemCmd::Poa) => commands::single_item_poa(&s)?,
        Command::SingleItem(SingleItemCmd::Revenue) => commands::single_item_revenue(&s)?,
        Command::Psam(PsamCmd::Solve) => commands::psam_solve(&s)?,
        Command::Simul(SimulCmd::Validate) => commands::simul_validate(&s)?,
        Command::Bounds(BoundsCmd::Prop1) => commands::bounds_prop1(&s)?,
        Command::Bounds(BoundsCmd::Rfv) => commands::bounds_rfv(&s)?,
        Command::Bounds(BoundsCmd::Lambda) => commands::bounds_lambda(&s)?,
        Command::Verify => commands::verify(&s)?,
    };
    let passed = out.envelope.passed;
    let json = serde_json::to_string_pretty(&out.envelope).expect("results serialize") + "\n";
    let csv_to_stdout = out.csv_default_stdout && s.csv.is_none();
    match (&s.out, csv_to_stdout) {
        (Some(path), _) => write_file(path, &json)?,
        (None, false) => print(&json)?,
        (None, true) => {}
    }
    if let Some(csv) = &out.csv {
        match &s.csv {
            Some(path) => write_file(path, csv)?,
            None if csv_to_stdout => print(csv)?,
            None => {}
        }
    }
    for check in out.envelope.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {}: {}", check.name, check.detail);
    }
    Ok(passed)
}

fn write_file(path: &std::path::Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print(text: &str) -> Result<(), Failure> {
    std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Input(format!("stdout: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
