//! `qcert` command-line entry point.
//!
//! Exit codes: 0 success, 1 negative verdict (invalid certificate, failed
//! check, non-optimal solve), 2 error (bad input, I/O, unsupported size).

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcert::sdp::PinMode;

#[derive(Parser, Debug)]
#[command(name = "qcert", version, about = "Symmetry-reduced SDP witnesses and exact dual certificates for Pauli correlation data")]
pub struct Cli {
    /// Seed for randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit JSON lines instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for data files; the bundled certificates are used when absent.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Anti-commutativity graph of the n-qubit Pauli strings of weight >= delta.
    Graph {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        delta: usize,
        /// Print only the vertex count.
        #[arg(long)]
        count_only: bool,
    },
    /// Weight sums A_i and diagonal entries a_i as exact fractions.
    Correlations {
        #[arg(long)]
        n: usize,
    },
    /// Constraint report for the moment matrix of a random seeded ensemble.
    Oracle {
        #[arg(long)]
        n: usize,
        /// Number of pure states in the ensemble.
        #[arg(long, default_value_t = 3)]
        size: usize,
    },
    /// Build an SDP instance and export it in SDPA sparse format (requires --out).
    Build(BuildArgs),
    /// Solve an SDPA sparse file.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// Verify a `.qcert` dual certificate exactly.
    VerifyCert {
        path: PathBuf,
        /// Correlation table for entanglement certificates, e.g. `n=7`.
        #[arg(long, value_parser = parse_table)]
        table: Option<usize>,
    },
    /// Run the full chain: tables, theta_sym, witness gap, both certificates.
    Reproduce,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(value_enum)]
    pub kind: BuildKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub delta: Option<usize>,
    /// Diagonal data pinning for `feas`.
    #[arg(long, default_value = "per-weight", value_parser = parse_pin)]
    pub pin: PinMode,
    /// Target value `1 + Σ M_aa` for `theta-body`.
    #[arg(long)]
    pub target: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BuildKind {
    /// Lovász theta of the Pauli anti-commutativity graph.
    Theta,
    /// Symmetry-reduced theta.
    ThetaSym,
    /// Moment-matrix feasibility with the correlation table of n qubits.
    Feas,
    /// Theta-body membership at a target value.
    ThetaBody,
}

fn parse_table(s: &str) -> Result<usize, String> {
    s.strip_prefix("n=")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("expected n=<qubits>, got {s:?}"))
}

fn parse_pin(s: &str) -> Result<PinMode, String> {
    s.parse().map_err(|e: qcert::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
