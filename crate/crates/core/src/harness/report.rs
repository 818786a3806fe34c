//! Report types and their JSON / CSV renderings.
//!
//! JSON reports carry `schema_version`; bump it whenever a field is renamed
//! or removed. `metadata.generated_at_unix` is the only field that differs
//! between two runs of the same configuration.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::lhv::GENERATOR;
use crate::stats::sigmas;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeStat {
    pub outcome: String,
    pub count: u64,
    pub frequency: f64,
    pub expected: f64,
    pub std_error: f64,
    pub sigmas: f64,
}

/// How a check's deviation is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// `|observed - expected| / std_error`
    Sigmas,
    /// `|observed - expected|`
    Absolute,
    /// `observed - expected`; passes when not above the threshold.
    Excess,
    /// `expected - observed`; passes when not above the threshold.
    Shortfall,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub std_error: Option<f64>,
    pub tolerance: Tolerance,
    pub deviation: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn sigmas(name: &str, observed: f64, expected: f64, se: f64, max_sigmas: f64) -> Self {
        let deviation = sigmas(observed, expected, se);
        Check {
            name: name.into(),
            observed,
            expected,
            std_error: Some(se),
            tolerance: Tolerance::Sigmas,
            deviation,
            threshold: max_sigmas,
            pass: deviation <= max_sigmas,
        }
    }

    pub fn absolute(name: &str, observed: f64, expected: f64, tol: f64) -> Self {
        let deviation = (observed - expected).abs();
        Check {
            name: name.into(),
            observed,
            expected,
            std_error: None,
            tolerance: Tolerance::Absolute,
            deviation,
            threshold: tol,
            pass: deviation <= tol,
        }
    }

    /// Passes when `observed ≤ bound + slack`.
    pub fn at_most(name: &str, observed: f64, bound: f64, slack: f64) -> Self {
        let deviation = observed - bound;
        Check {
            name: name.into(),
            observed,
            expected: bound,
            std_error: None,
            tolerance: Tolerance::Excess,
            deviation,
            threshold: slack,
            pass: deviation <= slack,
        }
    }

    /// Passes when `observed ≥ bound`.
    pub fn at_least(name: &str, observed: f64, bound: f64) -> Self {
        let deviation = bound - observed;
        Check {
            name: name.into(),
            observed,
            expected: bound,
            std_error: None,
            tolerance: Tolerance::Shortfall,
            deviation,
            threshold: 0.0,
            pass: deviation <= 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub master_seed: u64,
    pub generator: &'static str,
    pub version: &'static str,
    pub generated_at_unix: u64,
}

impl Metadata {
    pub fn new(master_seed: u64) -> Self {
        Metadata {
            master_seed,
            generator: GENERATOR,
            version: env!("CARGO_PKG_VERSION"),
            generated_at_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub mode: String,
    pub trials: u64,
    pub outcomes: Vec<OutcomeStat>,
    pub checks: Vec<Check>,
    /// Largest deviation among the sigma-measured checks and outcomes.
    pub max_sigmas: f64,
    pub mean_iterations: Option<f64>,
    pub mean_ideal_bits: Option<f64>,
    /// Other reported quantities, not gated.
    pub values: BTreeMap<String, f64>,
    pub verdict: Verdict,
    pub metadata: Metadata,
}

impl StatsReport {
    pub fn new(mode: &str, trials: u64, master_seed: u64) -> Self {
        StatsReport {
            schema_version: SCHEMA_VERSION,
            mode: mode.into(),
            trials,
            outcomes: Vec::new(),
            checks: Vec::new(),
            max_sigmas: 0.0,
            mean_iterations: None,
            mean_ideal_bits: None,
            values: BTreeMap::new(),
            verdict: Verdict {
                pass: true,
                first_failure: None,
            },
            metadata: Metadata::new(master_seed),
        }
    }

    /// Adds per-outcome counts. Frequencies are `count / total`.
    pub fn set_outcomes(&mut self, labels: &[String], counts: &[u64], expected: &[f64]) {
        let total: u64 = counts.iter().sum();
        self.outcomes = labels
            .iter()
            .zip(counts)
            .zip(expected)
            .map(|((l, &c), &p)| {
                let frequency = c as f64 / total as f64;
                let se = crate::stats::binomial_se(p, total);
                OutcomeStat {
                    outcome: l.clone(),
                    count: c,
                    frequency,
                    expected: p,
                    std_error: se,
                    sigmas: sigmas(frequency, p, se),
                }
            })
            .collect();
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Fills `max_sigmas` and the verdict. Call after the last check.
    pub fn finish(mut self) -> Self {
        self.max_sigmas = self
            .checks
            .iter()
            .filter(|c| c.tolerance == Tolerance::Sigmas)
            .map(|c| c.deviation)
            .chain(self.outcomes.iter().map(|o| o.sigmas))
            .fold(0.0, f64::max);
        let failed = self.checks.iter().find(|c| !c.pass);
        self.verdict = Verdict {
            pass: failed.is_none(),
            first_failure: failed.map(|c| c.name.clone()),
        };
        self
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }

    /// One row per outcome, then one per check.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "kind",
            "name",
            "observed",
            "expected",
            "std_error",
            "deviation",
            "threshold",
            "pass",
        ])?;
        for o in &self.outcomes {
            w.write_record([
                "outcome".to_string(),
                o.outcome.clone(),
                o.frequency.to_string(),
                o.expected.to_string(),
                o.std_error.to_string(),
                o.sigmas.to_string(),
                String::new(),
                String::new(),
            ])?;
        }
        for c in &self.checks {
            w.write_record([
                "check".to_string(),
                c.name.clone(),
                c.observed.to_string(),
                c.expected.to_string(),
                c.std_error.map(|s| s.to_string()).unwrap_or_default(),
                c.deviation.to_string(),
                c.threshold.to_string(),
                c.pass.to_string(),
            ])?;
        }
        for (k, v) in &self.values {
            w.write_record(["value", k, &v.to_string(), "", "", "", "", ""])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes any serializable flat struct as `key,value` rows.
pub fn write_key_values<W: Write, T: Serialize>(value: &T, out: W) -> csv::Result<()> {
    let json =
        serde_json::to_value(value).map_err(|e| csv::Error::from(std::io::Error::other(e)))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "value"])?;
    if let serde_json::Value::Object(map) = json {
        for (k, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            w.write_record([k, text])?;
        }
    }
    w.flush()?;
    Ok(())
}
