use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use crate::geometry::{UnitVec3, Vec3};

use super::{run, ExperimentConfig, HarnessError, Mode, OutputFormat};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn parse_vector(s: &str) -> Result<UnitVec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut c = [0.0; 3];
    for (slot, p) in c.iter_mut().zip(&parts) {
        *slot = p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"))?;
        if !slot.is_finite() {
            return Err(format!("{p:?} is not finite"));
        }
    }
    UnitVec3::normalize(Vec3::new(c[0], c[1], c[2])).map_err(|e| e.to_string())
}

/// Monte Carlo checks of classical qubit teleportation.
#[derive(Debug, Parser)]
#[command(name = "lhv-teleport", version)]
struct Args {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Master seed; every session seed is derived from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Alice's Bloch vector, "x,y,z" (normalized on input).
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    a: Option<UnitVec3>,
    /// Bob's measurement axis, "x,y,z" (normalized on input).
    #[arg(long, value_parser = parse_vector, allow_hyphen_values = true)]
    b: Option<UnitVec3>,
    /// JSON array of POVM vectors b_j.
    #[arg(long)]
    povm: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Per-check tolerance in standard errors.
    #[arg(long, default_value_t = 4.0)]
    sigmas: f64,
    /// Average bits per session (fidelity mode).
    #[arg(long, default_value_t = 2.0)]
    budget: f64,
    /// Cost of the full protocol in bits (fidelity mode).
    #[arg(long)]
    full_cost: Option<f64>,
}

impl Args {
    fn config(self) -> ExperimentConfig {
        ExperimentConfig {
            mode: self.mode,
            master_seed: self.seed,
            trials: self.trials,
            a: self.a,
            b: self.b,
            povm_file: self.povm,
            tolerance_sigmas: self.sigmas,
            output_format: self.format,
            budget: self.budget,
            full_cost: self.full_cost,
        }
    }
}

/// Parses `argv` (program name first), runs the experiment and writes the
/// report to `out`. Returns 0 on pass, 1 when a statistical check fails and
/// 2 on usage or input errors.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_PASS;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let config = args.config();
    let output = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return match e {
                HarnessError::Protocol(_) | HarnessError::Coding(_) => EXIT_FAIL,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(e) = output.write(config.output_format, &mut *out) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if output.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
