//! `freelip`: JSON-in, JSON-out front end for the solver library.
//!
//! Every invocation reads its inputs from files, prints one JSON object to
//! stdout, and exits 0 on success, 2 on invalid input, 1 on internal
//! failure. Outputs embed their inputs and a `checks` list so a consumer
//! can re-verify each certificate from the payload alone.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use freelip_core::{Error, Rat};

mod commands;

#[derive(Parser)]
#[command(
    name = "freelip",
    version,
    about = "Free-space norms, optimal representations, and Lipschitz extension analysis on finite metric spaces"
)]
pub struct Cli {
    /// Exact rational arithmetic (scalars print as "p/q" strings).
    #[arg(long, global = true)]
    pub exact: bool,

    /// Override the relative alignment tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Number of random cases for `selftest`.
    #[arg(long, global = true, default_value_t = 100)]
    pub cases: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Free norm of an element and a norming function.
    Norm { space: PathBuf, element: PathBuf },
    /// Norm-optimal pair representation of an element, with certificate.
    Decompose { space: PathBuf, element: PathBuf },
    /// Cyclical-monotonicity certificate for a pair measure.
    Certify { space: PathBuf, measure: PathBuf },
    /// Wasserstein-1 distance between two positive measures.
    Wasserstein {
        space: PathBuf,
        alpha: PathBuf,
        beta: PathBuf,
    },
    /// Metric segments; all nontrivial ones, or one pair with --pair.
    Segments {
        space: PathBuf,
        /// Endpoints p q of one segment.
        #[arg(long, num_args = 2, value_names = ["P", "Q"])]
        pair: Option<Vec<usize>>,
        /// Also report the open eps-enlargement of the segment.
        #[arg(long)]
        eps: Option<String>,
    },
    /// McShane extension analysis of values prescribed on a subset.
    Extend {
        space: PathBuf,
        problem: PathBuf,
        /// Report the extension envelope at one point.
        #[arg(long)]
        point: Option<usize>,
        /// Report the forced set.
        #[arg(long)]
        forced_set: bool,
        /// Report the forced pairs.
        #[arg(long)]
        forced_pairs: bool,
        /// Report the interpolated extension t E^+ + (1-t) E^-.
        #[arg(long)]
        t: Option<String>,
    },
    /// Extreme-point test for the molecule on a pair of points.
    Extreme {
        space: PathBuf,
        #[arg(long, num_args = 2, value_names = ["X", "Y"], required = true)]
        pair: Vec<usize>,
    },
    /// Union of segments spanned by the support of an element.
    FaceBound { space: PathBuf, element: PathBuf },
    /// Dyadic partial sums for the element induced by Lebesgue measure.
    DemoLebesgue {
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Smith-Volterra-Cantor staircase identities at finite depth.
    DemoCantor {
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Snowflake margin report on the grid {0, 1/n, ..., 1}.
    DemoSnowflake {
        #[arg(long, default_value_t = 10)]
        grid: usize,
        /// Exponent in (0, 1), e.g. "1/2" or "0.5".
        #[arg(long, default_value = "1/2")]
        theta: String,
    },
    /// Randomized cross-validation of every solver against its oracle.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = if cli.exact {
        commands::run::<Rat>(&cli)
    } else {
        commands::run::<f64>(&cli)
    };
    match outcome {
        Ok(output) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&output.value).expect("serializable output")
            );
            ExitCode::from(output.code)
        }
        Err(err) => {
            let (code, kind) = classify(&err);
            let payload = serde_json::json!({
                "error": { "kind": kind, "message": err.to_string() }
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&payload).expect("serializable error")
            );
            ExitCode::from(code)
        }
    }
}

fn classify(err: &Error) -> (u8, &'static str) {
    match err {
        Error::Internal(_) => (1, "internal"),
        Error::InvalidMetric(_) => (2, "invalid_metric"),
        Error::Parse(_) => (2, "parse"),
        Error::UnbalancedTotals { .. } => (2, "unbalanced_totals"),
        _ => (2, "invalid_input"),
    }
}
