use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sdemoment", version, about = "Exact moments of polynomial stochastic differential equations")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide pro-solvability and print the block partition.
    Check { model: PathBuf },
    /// Build the closed moment system for a target.
    Closure {
        model: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Compute a moment: closure, solution, optional certificate and simulation.
    Moment {
        model: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Time grid: `start:stop:step` or a comma list.
        #[arg(long, default_value = "0:10:0.5")]
        times: String,
        /// Print the closed form (exact when the spectrum is rational).
        #[arg(long)]
        closed_form: bool,
        /// Run the weighted-degree certificate on the closure.
        #[arg(long)]
        certify: bool,
        /// Compare against Euler–Maruyama at 4 standard errors.
        #[arg(long)]
        simulate: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Euler–Maruyama estimates as CSV.
    Simulate {
        model: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, default_value = "0:1:0.25")]
        times: String,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Rerun the bundled benchmark table and diff closure sizes.
    Table1,
    /// Cross-check closure, certificate, exact solution and numeric evaluation.
    Verify {
        model: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TargetArgs {
    /// Comma-separated exponents, e.g. `0,2`.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Polynomial functional, e.g. `(x1 - x2)^2`.
    #[arg(long)]
    pub expr: Option<String>,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Maximum number of monomials in the closure.
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    /// Maximum total degree of a closure monomial.
    #[arg(long, default_value_t = 200)]
    pub max_degree: u32,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
