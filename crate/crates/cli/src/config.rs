//! Run-wide settings shared by every subcommand.

use ame_core::equivalence::SearchOptions;
use ame_core::{ComplexAmp, Phase, SparseState};

use crate::error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "AME_SLOCC_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Rational phases only; real turns in inputs are rejected.
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub tolerance: f64,
    pub max_nodes: u64,
    pub seed: u64,
    pub output: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Exact,
            tolerance: ame_core::DEFAULT_TOLERANCE,
            max_nodes: SearchOptions::default().max_nodes,
            seed: 0,
            output: OutputFormat::Text,
        }
    }
}

impl RunConfig {
    pub fn new(mode: Mode, tolerance: f64, max_nodes: u64, seed: u64, output: OutputFormat) -> CliResult<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(CliError::Config(format!("tolerance must be a positive number, got {tolerance}")));
        }
        if max_nodes == 0 {
            return Err(CliError::Config("max-nodes must be positive".into()));
        }
        Ok(RunConfig { mode, tolerance, max_nodes, seed, output })
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions { tolerance: self.tolerance, max_nodes: self.max_nodes }
    }

    /// Reject inputs that carry real turns when running in exact mode.
    pub fn admit_state(&self, what: &str, s: &SparseState) -> CliResult<()> {
        if self.mode == Mode::Float {
            return Ok(());
        }
        let inexact = s.terms().values().any(|a| match a {
            ComplexAmp::Exact { phase, .. } => !phase.is_exact(),
            ComplexAmp::Float(_) => true,
        });
        if inexact {
            return Err(CliError::Config(format!(
                "{what} has real-valued phases or amplitudes; exact mode accepts rational turns only (use --mode float)"
            )));
        }
        Ok(())
    }

    pub fn admit_phases(&self, what: &str, phases: &[Phase]) -> CliResult<()> {
        if self.mode == Mode::Exact && phases.iter().any(|p| !p.is_exact()) {
            return Err(CliError::Config(format!(
                "{what} has real-valued phases; exact mode accepts rational turns only (use --mode float)"
            )));
        }
        Ok(())
    }
}

/// Worker cap from the environment; unset means the available parallelism.
pub fn thread_cap() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}
