//! Command-line front-end for the regression laboratory: Monte Carlo
//! simulation sweeps against the deterministic risk formulas, fixed-point
//! solving, feature-selection runs, and distribution-shift metrics.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 data or file error,
//! 4 numerical failure.

mod cmds;
mod io;

use clap::Parser;
use covlab::Error;

#[derive(Parser, Debug)]
#[command(name = "covlab", version, about = "Synthetic-data risk laboratory")]
enum Cli {
    /// Monte Carlo sweep against the matching theory curve (CSV on stdout).
    Simulate(cmds::SimulateArgs),
    /// Solve a fixed-point system and print coefficients, risk, residuals.
    Solve(cmds::SolveArgs),
    /// Run a selection method over feature CSV files.
    Select(cmds::SelectArgs),
    /// Covariance and mean shift between two feature CSV files.
    Metrics(cmds::MetricsArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli {
        Cli::Simulate(args) => cmds::cmd_simulate(args),
        Cli::Solve(args) => cmds::cmd_solve(args),
        Cli::Select(args) => cmds::cmd_select(args),
        Cli::Metrics(args) => cmds::cmd_metrics(args),
    };
    match result {
        Ok(output) => {
            print!("{output}");
        }
        Err(e) => {
            eprintln!("{e}");
            let code = match e {
                Error::Param(_) => 2,
                Error::Data(_) => 3,
                Error::Numerical(_) => 4,
            };
            std::process::exit(code);
        }
    }
}
