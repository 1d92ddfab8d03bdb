//! Runs private-set-intersection protocol sessions, replays the pinned
//! reference example, verifies the gate identities, demonstrates the
//! predecessor protocol's leakage, and collects eavesdropping statistics.
//!
//! Every subcommand writes one JSON report to stdout (or `--out`); human
//! summaries go to stderr. Exit codes: 0 success, 2 protocol abort,
//! 3 correctness-check failure, 64 usage error, 65 input-file error.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod input;
mod report;

use input::CliFailure;

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const ABORTED: i32 = 2;
    pub const CHECK_FAILED: i32 = 3;
    pub const USAGE: i32 = 64;
    pub const INPUT_FILE: i32 = 65;
}

#[derive(Parser)]
#[command(name = "qpsi", version, about = "Quantum private set intersection protocol simulator")]
struct Cli {
    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall-clock timing in the report. Off by default so reruns with
    /// the same seed stay byte-identical.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol session on the given universe and private sets.
    Run(RunArgs),
    /// Replay the pinned reference session and check every published value.
    DemoExample,
    /// Check the fractional-power gate identities and eigensystem residuals.
    VerifyGates(VerifyGatesArgs),
    /// Demonstrate the predecessor protocol's difference-set leakage.
    VulnNqpsi(VulnArgs),
    /// Collect eavesdropping detection statistics over attacked sessions.
    Attack(AttackArgs),
    /// Compare many random sessions against the classical intersection.
    MonteCarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HopArg {
    CalvinAlice,
    AliceBob,
    BobCalvin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Passthrough,
    Intercept,
    InterceptZ,
    InterceptX,
}

impl StrategyArg {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyArg::Passthrough => "passthrough",
            StrategyArg::Intercept => "intercept",
            StrategyArg::InterceptZ => "intercept-z",
            StrategyArg::InterceptX => "intercept-x",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Universal set: comma-separated integers, or a path to a file with one
    /// element per line.
    #[arg(long)]
    universe: Option<String>,
    /// Alice's private set (same formats as --universe).
    #[arg(long)]
    set_a: Option<String>,
    /// Bob's private set (same formats as --universe).
    #[arg(long)]
    set_b: Option<String>,
    /// Decoy particles inserted per quantum hop.
    #[arg(long)]
    decoys: Option<usize>,
    /// Comparison mode for Calvin's final check.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Measurement repetitions per position (sampled mode).
    #[arg(long)]
    reps: Option<usize>,
    /// Session seed; falls back to QPSI_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Retries after a failed decoy verification before aborting.
    #[arg(long)]
    retries: Option<u32>,
    /// Upper bound for the random masking exponents.
    #[arg(long)]
    exponent_bound: Option<u32>,
    /// Config file (JSON or key=value) mirroring the session config fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Embed full state vectors in the exported transcript.
    #[arg(long)]
    verbose_transcript: bool,
    /// Put an eavesdropper on a hop (defaults to calvin-alice when only a
    /// strategy is given).
    #[arg(long, value_enum)]
    eve_hop: Option<HopArg>,
    /// Eavesdropper behavior on the chosen hop.
    #[arg(long, value_enum)]
    eve_strategy: Option<StrategyArg>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyGatesArgs {
    /// Largest acceptable residual.
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
}

#[derive(Debug, clap::Args)]
pub struct VulnArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Random instances to check beyond the fixed example.
    #[arg(long, default_value_t = 100)]
    trials: usize,
}

#[derive(Debug, clap::Args)]
pub struct AttackArgs {
    /// Which quantum hop Eve attacks.
    #[arg(long, value_enum, default_value_t = HopArg::CalvinAlice)]
    hop: HopArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Intercept)]
    strategy: StrategyArg,
    /// Decoy particles per hop.
    #[arg(long, default_value_t = 16)]
    decoys: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, clap::Args)]
pub struct MonteCarloArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Largest universe size to sample.
    #[arg(long, default_value_t = 16)]
    max_n: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Measurement repetitions per position (sampled mode).
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let start = std::time::Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit_code::OK,
                _ => exit_code::USAGE,
            };
            let _ = e.print();
            return code;
        }
    };

    let result = match &cli.command {
        Command::Run(args) => commands::cmd_run(args),
        Command::DemoExample => commands::cmd_demo_example(),
        Command::VerifyGates(args) => commands::cmd_verify_gates(args),
        Command::VulnNqpsi(args) => commands::cmd_vuln_nqpsi(args),
        Command::Attack(args) => commands::cmd_attack(args),
        Command::MonteCarlo(args) => commands::cmd_monte_carlo(args, cli.timing),
    };

    match result {
        Ok((mut report, code)) => {
            if cli.timing {
                report.timing_ms = start.elapsed().as_millis() as u64;
            }
            let rendered = report.render();
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, rendered) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return exit_code::INPUT_FILE;
                    }
                }
                None => {
                    use std::io::Write;
                    let mut stdout = std::io::stdout();
                    let _ = stdout.write_all(rendered.as_bytes());
                    let _ = stdout.flush();
                }
            }
            code
        }
        Err(CliFailure { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}
