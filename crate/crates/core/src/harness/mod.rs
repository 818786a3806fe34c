//! Monte Carlo verification runs and the command-line front end.
//!
//! Sessions are split into fixed batches of [`BATCH`] consecutive session
//! indices. Batches run in parallel and their tallies are merged in batch
//! order, so a report depends only on the configuration, never on the number
//! of worker threads. `LHVT_WORKERS` overrides the thread count.

mod cli;
mod experiments;
pub mod report;

use std::io::Write;
use std::ops::Range;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coding::CodingError;
use crate::cost::EntropyReport;
use crate::geometry::UnitVec3;
use crate::protocol::povm::PovmLoadError;
use crate::protocol::{Povm, ProtocolError};

pub use cli::run_cli;
pub use experiments::{
    fidelity_report, verify_coding, verify_povm, verify_singlet, verify_vn, verify_vn_sweep,
    FidelityReport, SweepRule,
};
pub use report::{Check, OutcomeStat, StatsReport, Tolerance};

/// Sessions per parallel work unit.
pub const BATCH: u64 = 1 << 12;
pub const WORKERS_ENV: &str = "LHVT_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Vn,
    Singlet,
    Povm,
    Entropy,
    Coding,
    Fidelity,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Vn => "vn",
            Mode::Singlet => "singlet",
            Mode::Povm => "povm",
            Mode::Entropy => "entropy",
            Mode::Coding => "coding",
            Mode::Fidelity => "fidelity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    PovmLoad(#[from] PovmLoadError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error("cannot write report: {0}")]
    Output(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub master_seed: u64,
    pub trials: u64,
    /// Alice's state. Drawn from the master seed when absent (per session in
    /// coding mode).
    pub a: Option<UnitVec3>,
    /// Bob's measurement axis. Drawn from the master seed when absent.
    pub b: Option<UnitVec3>,
    pub povm_file: Option<PathBuf>,
    pub tolerance_sigmas: f64,
    pub output_format: OutputFormat,
    /// Average bits per session for fidelity mode.
    pub budget: f64,
    /// Cost of the full protocol for fidelity mode; defaults to the computed
    /// `total_vn`.
    pub full_cost: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        ExperimentConfig {
            mode,
            master_seed: 0,
            trials: 100_000,
            a: None,
            b: None,
            povm_file: None,
            tolerance_sigmas: 4.0,
            output_format: OutputFormat::Json,
            budget: 2.0,
            full_cost: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Usage("trials must be at least 1".into()));
        }
        if self.tolerance_sigmas.is_nan() || self.tolerance_sigmas <= 0.0 {
            return Err(HarnessError::Usage(
                "tolerance in sigmas must be positive".into(),
            ));
        }
        if self.mode == Mode::Povm && self.povm_file.is_none() {
            return Err(HarnessError::Usage("povm mode needs --povm <file>".into()));
        }
        if let Some(c) = self.full_cost {
            if c.is_nan() || c <= 0.0 {
                return Err(HarnessError::Usage("full cost must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn load_povm(&self) -> Result<Povm, HarnessError> {
        let path = self
            .povm_file
            .as_ref()
            .ok_or_else(|| HarnessError::Usage("no POVM file given".into()))?;
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(Povm::from_json(&text)?)
    }
}

/// Random generator for configuration-level draws (default `a`, `b`, sweep
/// pairs). Uses ChaCha stream `u64::MAX - tag`, far from any record index.
pub fn aux_rng(master_seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(u64::MAX - tag);
    rng
}

/// Runs `f` inside a pool sized by `LHVT_WORKERS` if set, else rayon's
/// default pool.
pub fn with_workers<T: Send, F: FnOnce() -> T + Send>(f: F) -> T {
    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match workers.map(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build()) {
        Some(Ok(pool)) => pool.install(f),
        Some(Err(e)) => {
            log::warn!("cannot build a pool of the requested size: {e}");
            f()
        }
        None => f(),
    }
}

/// Applies `f` to consecutive batches of `0..n` in parallel and returns the
/// results in batch order.
pub fn fold_batches<A, E, F>(n: u64, f: F) -> Result<Vec<A>, E>
where
    A: Send,
    E: Send,
    F: Fn(Range<u64>) -> Result<A, E> + Sync + Send,
{
    let batches = n.div_ceil(BATCH);
    with_workers(|| {
        (0..batches)
            .into_par_iter()
            .map(|i| f(i * BATCH..((i + 1) * BATCH).min(n)))
            .collect()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Output {
    Stats(StatsReport),
    Entropy(EntropyReport),
    Fidelity(FidelityReport),
}

impl Output {
    pub fn passed(&self) -> bool {
        match self {
            Output::Stats(r) => r.verdict.pass,
            Output::Entropy(_) | Output::Fidelity(_) => true,
        }
    }

    pub fn write<W: Write>(&self, format: OutputFormat, mut out: W) -> Result<(), HarnessError> {
        let err = |e: &dyn std::fmt::Display| HarnessError::Output(e.to_string());
        match format {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut out, self).map_err(|e| err(&e))?;
                writeln!(out).map_err(|e| err(&e))
            }
            OutputFormat::Csv => match self {
                Output::Stats(r) => r.write_csv(out).map_err(|e| err(&e)),
                Output::Entropy(r) => report::write_key_values(r, out).map_err(|e| err(&e)),
                Output::Fidelity(r) => report::write_key_values(r, out).map_err(|e| err(&e)),
            },
        }
    }
}

/// Validates `config` and runs the experiment it names.
pub fn run(config: &ExperimentConfig) -> Result<Output, HarnessError> {
    config.validate()?;
    Ok(match config.mode {
        Mode::Vn => Output::Stats(verify_vn(config)?),
        Mode::Singlet => Output::Stats(verify_singlet(config)?),
        Mode::Povm => Output::Stats(verify_povm(config)?),
        Mode::Coding => Output::Stats(verify_coding(config)?),
        Mode::Entropy => Output::Entropy(crate::cost::entropy_report().clone()),
        Mode::Fidelity => Output::Fidelity(fidelity_report(config)),
    })
}
