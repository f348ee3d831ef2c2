use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exact Lie symmetry analysis of the (2+1)-dimensional Kuramoto-Sivashinsky equation.
#[derive(Debug, Parser)]
#[command(name = "liesym", version)]
pub struct Cli {
    #[command(flatten)]
    pub session: Session,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Session {
    /// Value of nu: a rational such as 3/2, or "symbolic".
    #[arg(long, global = true, default_value = "symbolic")]
    pub nu: String,
    /// Value of kappa: a rational or "symbolic".
    #[arg(long, global = true, default_value = "symbolic")]
    pub kappa: String,
    /// Value of lambda: a nonzero rational or "symbolic".
    #[arg(long, global = true, default_value = "symbolic")]
    pub lambda: String,
    /// Equation variant: eq11 (h_t = nu*lap h - ...) or eq29 (h_t + nu*lap h + ...).
    #[arg(long, global = true, default_value = "eq29")]
    pub delta: String,
    /// Sign convention of the boost generators V6, V7.
    #[arg(long, global = true, default_value = "recomputed")]
    pub basis: String,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover the point symmetries under a polynomial ansatz.
    Symmetries {
        #[arg(long, default_value_t = 2)]
        degree: u32,
    },
    /// Check that each generator (or a given field) leaves the equation invariant.
    Verify {
        /// Custom field "xi1; xi2; xi3; phi".
        #[arg(long)]
        field: Option<String>,
    },
    /// Commutator table, Killing form, derived series.
    Algebra {
        /// Print the commutator table.
        #[arg(long)]
        table: bool,
    },
    /// Adjoint matrices exp(-s ad V_i) with their checks.
    Adjoint,
    /// One-parameter groups and the induced maps on solutions.
    Flow {
        /// Single generator index 1..7.
        #[arg(long)]
        generator: Option<usize>,
    },
    /// Normal form of a*V under the adjoint action.
    Optimal {
        /// Coefficients "a1,...,a7".
        #[arg(long)]
        coeffs: String,
    },
    /// Similarity reduction for a catalog row or explicit invariants.
    Reduce {
        /// Catalog row 1..12.
        #[arg(long, conflicts_with_all = ["z", "w", "r", "section", "generator"])]
        row: Option<usize>,
        #[arg(long, requires_all = ["w", "r", "section", "generator"])]
        z: Option<String>,
        #[arg(long)]
        w: Option<String>,
        #[arg(long)]
        r: Option<String>,
        /// Slice "x; y; t" in terms of z, w (and rho with rho^2 = z).
        #[arg(long)]
        section: Option<String>,
        /// Generator "xi1; xi2; xi3; phi".
        #[arg(long)]
        generator: Option<String>,
    },
    /// Nonclassical symmetries with xi3 = 1.
    Nonclassical {
        #[arg(long, default_value_t = 2)]
        degree: u32,
    },
    /// Every mismatch between the published results and the recomputation.
    Discrepancies,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
