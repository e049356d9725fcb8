use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod output;

use commands::CliError;

/// Overlapping canonical forms for lossless discrete-time systems.
///
/// Exit codes: 0 success, 1 validation failure, 2 usage or parse error,
/// 3 numerical error or chart mismatch.
#[derive(Debug, Parser)]
#[command(name = "atlas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the admissible charts for m inputs and order n.
    ///
    /// CSV columns: index, d, Y, J, Jtilde, u. Sequences are space
    /// separated and the rows of Y are separated by '/'.
    Enumerate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        /// One chart per vector of dynamical indices.
        #[arg(long)]
        minimal: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Refuse sizes with m * n above this bound.
        #[arg(long, default_value_t = 24)]
        max_size: usize,
    },
    /// Build the orthogonal realization of a chart and its parameters.
    Realize {
        #[arg(long)]
        chart: String,
        #[arg(long)]
        params: String,
        /// Write the system here instead of stdout.
        #[arg(long)]
        out: Option<String>,
        /// Tolerance for the structure checks in the validation block.
        #[arg(long, env = "ATLAS_TOL", default_value_t = atlas_core::DEFAULT_TOL)]
        tol: f64,
    },
    /// Transform a system into a chart by an orthogonal state isomorphism.
    ///
    /// A pair [B, A] that is not row-orthonormal is input-normalized first.
    Canonicalize {
        #[arg(long)]
        system: String,
        #[arg(long, conflicts_with = "atlas", required_unless_present = "atlas")]
        chart: Option<String>,
        /// Pick the best conditioned chart of the minimal atlas.
        #[arg(long, value_enum)]
        atlas: Option<AtlasKind>,
        /// Relative singular value threshold for chart membership.
        #[arg(long, env = "ATLAS_TOL", default_value_t = atlas_core::sysid::DEFAULT_RANK_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Check orthogonality, stability, Gramians and chart structure.
    Check {
        #[arg(long)]
        system: String,
        #[arg(long, env = "ATLAS_TOL", default_value_t = atlas_core::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Draw Schur parameters for a chart from a seed.
    Random {
        #[arg(long)]
        chart: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AtlasKind {
    Minimal,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Enumerate {
            m,
            n,
            minimal,
            format,
            max_size,
        } => commands::enumerate(m, n, minimal, format, max_size),
        Command::Realize {
            chart,
            params,
            out,
            tol,
        } => commands::realize(&chart, &params, out.as_deref(), tol),
        Command::Canonicalize {
            system,
            chart,
            atlas,
            tol,
            out,
        } => commands::canonicalize(&system, chart.as_deref(), atlas, tol, out.as_deref()),
        Command::Check {
            system,
            tol,
            format,
        } => commands::check(&system, tol, format),
        Command::Random { chart, seed, out } => commands::random(&chart, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
