//! Command-line front end: file formats, instance generation, batch
//! benchmarking and trace emission around the `fairdiv` solvers.

pub mod commands;
pub mod files;
pub mod generate;
pub mod trace;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairdiv::algorithms::Mode;
use fairdiv::{FairnessNotion, Rational, Threshold};

pub use commands::{cmd_bench, cmd_gen, cmd_oracle, cmd_solve, cmd_verify, BenchSummary};

/// Exit status for a completed command whose guarantee or threshold failed.
pub const EXIT_FAILED: u8 = 1;
/// Exit status for usage and input errors.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "fairdiv", version, about = "Approximately fair allocation of indivisible goods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute an allocation with one of the approximation algorithms.
    Solve(SolveArgs),
    /// Measure the fairness factor of a given allocation.
    Verify(VerifyArgs),
    /// Write a seeded random instance.
    Gen(GenArgs),
    /// Solve many seeded random instances and summarise the factors.
    Bench(BenchArgs),
    /// Run a brute-force reference computation.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    /// (√3 − 1)-approximate EFR
    Efr,
    /// (φ − 1)-approximate EFX
    Efx,
}

impl Algorithm {
    pub fn mode(self) -> Mode {
        match self {
            Algorithm::Efr => Mode::Efr,
            Algorithm::Efx => Mode::Efx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    pub fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Notion {
    Ef,
    Ef1,
    Efx,
    Efr,
}

impl From<Notion> for FairnessNotion {
    fn from(notion: Notion) -> Self {
        match notion {
            Notion::Ef => FairnessNotion::Ef,
            Notion::Ef1 => FairnessNotion::Ef1,
            Notion::Efx => FairnessNotion::Efx,
            Notion::Efr => FairnessNotion::Efr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleCheck {
    NswMatching,
    BestEfr,
    BestEfx,
    ImprovingCycle,
    EnvyRank,
}

/// Inclusive integer range written `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected a..b, found {s:?}"))?;
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        let range = IntRange {
            lo: parse(lo)?,
            hi: parse(hi)?,
        };
        if range.lo > range.hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(range)
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

fn parse_threshold(s: &str) -> Result<Threshold, String> {
    s.parse().map_err(|e: fairdiv::rational::ParseRationalError| e.to_string())
}

fn parse_probability(s: &str) -> Result<Rational, String> {
    fairdiv::rational::parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value = "efr")]
    pub algorithm: Algorithm,
    /// Instance file, or `-` for standard input.
    #[arg(long)]
    pub input: String,
    /// Allocation file to write, or `-` for standard output.
    #[arg(long, default_value = "-")]
    pub output: String,
    /// Also write the step-by-step trace as JSON lines.
    #[arg(long)]
    pub trace: Option<String>,
    /// Run the exact mid-run invariant checks.
    #[arg(long, value_enum, default_value = "on")]
    pub check: Switch,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: String,
    #[arg(long)]
    pub allocation: String,
    #[arg(long, value_enum, default_value = "efr")]
    pub notion: Notion,
    /// A decimal or `p/q` constant, `sqrt3-1`, or `phi-1`.
    #[arg(long, default_value = "1", value_parser = parse_threshold)]
    pub threshold: Threshold,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub agents: usize,
    #[arg(long)]
    pub items: usize,
    #[arg(long, default_value_t = 0)]
    pub lo: u64,
    #[arg(long, default_value_t = 100)]
    pub hi: u64,
    /// Probability that a value is zero, e.g. `0.1` or `1/10`.
    #[arg(long, default_value = "0", value_parser = parse_probability)]
    pub zero_probability: Rational,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Require at least as many items as agents, as the solvers do.
    #[arg(long)]
    pub solver_bound: bool,
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value = "2..6")]
    pub agents_range: IntRange,
    /// Item counts; each instance draws from `max(a, agents)..b`.
    #[arg(long, default_value = "2..12")]
    pub items_range: IntRange,
    #[arg(long, default_value_t = 0)]
    pub lo: u64,
    #[arg(long, default_value_t = 100)]
    pub hi: u64,
    /// Zero probabilities, cycled over the instances.
    #[arg(long, value_delimiter = ',', default_value = "0,1/10", value_parser = parse_probability)]
    pub zero_probability: Vec<Rational>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "efr")]
    pub algorithm: Algorithm,
    #[arg(long, value_enum, default_value = "on")]
    pub check: Switch,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: String,
    #[arg(long, value_enum)]
    pub check: OracleCheck,
    /// Allocation whose envy-ratio graph is examined (improving-cycle, envy-rank).
    #[arg(long)]
    pub allocation: Option<String>,
    #[arg(long, default_value_t = fairdiv::oracle::OracleLimits::default().max_agents)]
    pub max_agents: usize,
    #[arg(long, default_value_t = fairdiv::oracle::OracleLimits::default().max_items)]
    pub max_items: usize,
    #[arg(long, default_value_t = fairdiv::oracle::OracleLimits::default().max_allocations)]
    pub max_allocations: u64,
}

/// Exit status for an error: 1 when a solver guarantee was violated, 2 otherwise.
pub fn exit_code_for(error: &anyhow::Error) -> u8 {
    let violated = error
        .chain()
        .any(|cause| matches!(cause.downcast_ref(), Some(fairdiv::Error::InternalGuaranteeViolated(_))));
    if violated {
        EXIT_FAILED
    } else {
        EXIT_INPUT
    }
}

/// Runs a parsed command, writing reports to `out` and errors to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Gen(args) => cmd_gen(args, out),
        Command::Bench(args) => cmd_bench(args, out).map(|summary| summary.exit_code()),
        Command::Oracle(args) => cmd_oracle(args, out),
    };
    match result {
        Ok(code) => code,
        Err(error) => {
            let _ = writeln!(err, "error: {error:#}");
            exit_code_for(&error)
        }
    }
}
