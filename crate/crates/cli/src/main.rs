//! `qfci`: phase-estimation FCI energies, state preparation sweeps and
//! resource counts from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 capacity error, 4 numeric failure.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qfci::phase::{extra_bits_for, PhaseConfig, PhaseMode, PropagatorMode};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] qfci::Error),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use qfci::Error as E;
        match self {
            CliError::Core(E::Capacity(_)) => 3,
            CliError::Core(E::Numeric(_)) => 4,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "qfci", version, about = "Simulated quantum full configuration interaction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate one energy by phase estimation and compare it with exact diagonalization.
    Energy(EnergyArgs),
    /// Run phase estimation over every integral file in a directory.
    Sweep(SweepArgs),
    /// Adiabatic state preparation trajectory.
    Asp(AspArgs),
    /// Gate counts of one controlled propagator for synthetic Hamiltonians.
    Scaling(ScalingArgs),
    /// Tabulate the two-readout PEA success probabilities against the phase remainder.
    Analyze(AnalyzeArgs),
    /// Re-run the command stored in a run manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pea,
    IpeaA,
    IpeaB,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Hartree,
    Wavenumber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TermsArg {
    Full,
    OneBody,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    /// Phase bits to resolve.
    #[arg(long = "m", default_value_t = 20)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::IpeaA)]
    pub mode: ModeArg,
    /// Votes per bit for ipea-b (odd).
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Extra bits beyond --m; overrides --epsilon.
    #[arg(long)]
    pub extra_bits: Option<usize>,
    /// Failure tolerance for the extra-bit rule (iterative modes, default 1e-3).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Trotter slices per propagator.
    #[arg(long, conflicts_with = "dense")]
    pub trotter: Option<usize>,
    /// Exact propagator from the eigendecomposition (default).
    #[arg(long)]
    pub dense: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub emin: Option<f64>,
}

impl PhaseArgs {
    pub fn config(&self) -> CliResult<PhaseConfig> {
        let mode = match self.mode {
            ModeArg::Pea => PhaseMode::Pea,
            ModeArg::IpeaA => PhaseMode::IpeaA,
            ModeArg::IpeaB => PhaseMode::IpeaB,
        };
        let mut cfg = PhaseConfig::new(self.m, mode);
        cfg.repetitions = self.reps;
        cfg.extra_bits = match (self.extra_bits, self.epsilon) {
            (Some(k), _) => k,
            (None, Some(eps)) => extra_bits_for(eps)?,
            (None, None) if mode == PhaseMode::Pea => 0,
            (None, None) => extra_bits_for(1e-3)?,
        };
        cfg.propagator = match self.trotter {
            Some(n) => PropagatorMode::Trotter(n),
            None => PropagatorMode::Dense,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long)]
    pub csv: bool,
    /// Write results here instead of stdout; a run manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Energy units for text and CSV output.
    #[arg(long, value_enum, default_value_t = Units::Hartree)]
    pub units: Units,
}

#[derive(Debug, Clone, Args)]
pub struct GuessArgs {
    /// Initial guess, lines `bitstring re im`; defaults to Hartree-Fock.
    #[arg(long)]
    pub guess_file: Option<PathBuf>,
    /// Drop guess amplitudes with modulus at or below this value.
    #[arg(long, default_value_t = 0.0)]
    pub guess_threshold: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    /// FCIDUMP or complex integral file.
    pub input: PathBuf,
    #[command(flatten)]
    pub guess: GuessArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub phase: PhaseArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Directory of integral files.
    pub dir: PathBuf,
    /// One state per guess file; Hartree-Fock when none is given.
    #[arg(long = "guess-file")]
    pub guess_files: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub guess_threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub phase: PhaseArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AspArgs {
    pub input: PathBuf,
    /// Total evolution time in hbar/hartree.
    #[arg(long, default_value_t = 1000.0)]
    pub time: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[command(flatten)]
    pub guess: GuessArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    /// Spin-orbital counts.
    #[arg(long = "n", value_delimiter = ',', default_value = "8,12,16,20,24")]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = TermsArg::Full)]
    pub terms: TermsArg,
    /// Real integrals instead of complex ones.
    #[arg(long)]
    pub real: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long = "m", default_value_t = 20)]
    pub m: usize,
    /// Explicit remainders in [0, 1).
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    /// Uniform grid size when --deltas is absent.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write to this path instead of the recorded output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match commands::run(cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfci: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
