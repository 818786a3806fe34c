//! Communication cost of the protocol.
//!
//! For a Haar-random frame, the coordinates of `a` in that frame form a
//! uniform unit vector, so with `x = |a·λ|`, `y = |a·μ|`, `z = |a·ν|` the
//! zone probabilities given `u` are
//!
//! ```text
//! p_Aλ(u) = P(x > u)                = max(0, 1 - u)
//! p_Aμ(u) = P(x ≤ u < x + y)
//! p_Aν(u) = P(x + y ≤ u < x + y + z)
//! p_R(u)  = P(x + y + z ≤ u)
//! ```
//!
//! `x` is uniform on `[0, 1]` and, given `x`, `(y, z) = s (cos φ, sin φ)` with
//! `s = √(1 - x²)` and `φ` uniform on `[0, π/2]`. The `φ` integral has a closed
//! form in terms of `w = (u - x)/s`, which leaves one adaptive quadrature over
//! `x`. Averages over `u` add a second, outer quadrature.
//!
//! The conditional entropy of `(k, l)` given Bob's knowledge of the `u`
//! stream is `H = (q_Aλ + q_Aμ + q_Aν + q_R)/p_A` where
//! `q_z = -(1/√3) ∫ p_z log₂ p_z du`.

use std::f64::consts::{FRAC_2_PI, PI, SQRT_2};
use std::sync::OnceLock;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lhv::{RecordSource, GENERATOR, U_MAX};
use crate::protocol::{AliceMessage, SessionTranscript, Zone};
use crate::quadrature::{integrate, Estimate};

/// Absolute tolerance of the inner (over `x`) quadrature.
pub const INNER_TOL: f64 = 1e-12;
/// Absolute tolerance of the outer (over `u`) quadrature.
pub const OUTER_TOL: f64 = 1e-10;
/// Intervals of the interpolation grid over `[0, √3]`.
pub const TABLE_INTERVALS: usize = 3 << 14;

const MAX_PANELS: usize = 2000;
const U_BREAKS: [f64; 4] = [0.0, 1.0, SQRT_2, U_MAX];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("u = {0} outside [0, √3]")]
    OutOfRange(f64),
}

/// `P(cos φ ≤ w)` for `φ` uniform on `[0, π/2]`, `w ≥ 0`.
fn cos_cdf(w: f64) -> f64 {
    if w >= 1.0 {
        1.0
    } else {
        1.0 - FRAC_2_PI * w.max(0.0).acos()
    }
}

/// `P(cos φ + sin φ ≤ w)` for `φ` uniform on `[0, π/2]`.
fn cos_plus_sin_cdf(w: f64) -> f64 {
    if w < 1.0 {
        0.0
    } else if w >= SQRT_2 {
        1.0
    } else {
        (4.0 / PI) * (w / SQRT_2).asin() - 1.0
    }
}

fn scaled_gap(x: f64, u: f64) -> f64 {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let d = u - x;
    if s == 0.0 {
        if d > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        d / s
    }
}

/// Conditional probability of `zone` given `x = |a·λ|` and `u`, for `x ≤ u`.
fn inner_integrand(zone: Zone, x: f64, u: f64) -> f64 {
    let w = scaled_gap(x, u);
    match zone {
        Zone::AMu => 1.0 - cos_cdf(w),
        Zone::ANu => cos_cdf(w) - cos_plus_sin_cdf(w),
        Zone::Reject => cos_plus_sin_cdf(w),
        Zone::ALambda => unreachable!("closed form"),
    }
}

/// Points in `(0, hi)` where `(u - x)/√(1 - x²)` equals `c`.
fn crossings(u: f64, c: f64, hi: f64, out: &mut Vec<f64>) {
    let disc = 1.0 + c * c - u * u;
    if disc < 0.0 {
        return;
    }
    let r = c * disc.sqrt();
    for x in [(u - r) / (1.0 + c * c), (u + r) / (1.0 + c * c)] {
        if x > 0.0 && x < hi {
            out.push(x);
        }
    }
}

/// Direct quadrature of `p_zone(u)` with its error estimate. No range check.
pub fn zone_prob_estimate(zone: Zone, u: f64) -> Estimate {
    if zone == Zone::ALambda {
        return Estimate {
            value: (1.0 - u).max(0.0),
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        };
    }
    let hi = u.min(1.0);
    if hi <= 0.0 {
        return Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            intervals: 0,
        };
    }
    let mut pts = vec![0.0, hi];
    crossings(u, 1.0, hi, &mut pts);
    crossings(u, SQRT_2, hi, &mut pts);
    pts.sort_by(f64::total_cmp);
    let mut e = integrate(|x| inner_integrand(zone, x, u), &pts, INNER_TOL, MAX_PANELS);
    e.value = e.value.clamp(0.0, 1.0);
    e
}

/// Probability that a Haar-random triplet places `u` in `zone`.
pub fn zone_prob_given_u(zone: Zone, u: f64) -> Result<f64, CostError> {
    if !(0.0..=U_MAX).contains(&u) {
        return Err(CostError::OutOfRange(u));
    }
    Ok(zone_prob_estimate(zone, u).value)
}

/// `-p log₂ p` with the `p → 0` limit.
pub fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

fn average_over_u<F: Fn(f64) -> f64>(f: F) -> f64 {
    integrate(f, &U_BREAKS, OUTER_TOL, MAX_PANELS).value / U_MAX
}

/// `(1/√3) ∫ p_zone(u) du`.
pub fn zone_prob_avg(zone: Zone) -> f64 {
    average_over_u(|u| zone_prob_estimate(zone, u).value)
}

/// `-(1/√3) ∫ p_zone(u) log₂ p_zone(u) du`.
pub fn q_value(zone: Zone) -> f64 {
    average_over_u(|u| plogp(zone_prob_estimate(zone, u).value))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QValues {
    pub a_lambda: f64,
    pub a_mu: f64,
    pub a_nu: f64,
    pub r: f64,
}

impl QValues {
    pub fn accept_total(&self) -> f64 {
        self.a_lambda + self.a_mu + self.a_nu
    }
}

pub fn q_values() -> QValues {
    QValues {
        a_lambda: q_value(Zone::ALambda),
        a_mu: q_value(Zone::AMu),
        a_nu: q_value(Zone::ANu),
        r: q_value(Zone::Reject),
    }
}

/// Cost summary for every protocol variant, in bits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub p_a_lambda: f64,
    pub p_a_mu: f64,
    pub p_a_nu: f64,
    pub p_a: f64,
    pub p_r: f64,
    pub q_a_lambda: f64,
    pub q_a_mu: f64,
    pub q_a_nu: f64,
    pub q_r: f64,
    /// Conditional entropy of `(k, l)` given the `u` stream.
    pub h: f64,
    /// Von Neumann teleportation: `H + 1` sign bit.
    pub total_vn: f64,
    /// Singlet simulation: `H`.
    pub singlet_bits: f64,
    /// POVM: `2 (total_vn + 1)`.
    pub total_povm: f64,
    pub inner_tolerance: f64,
    pub outer_tolerance: f64,
    pub generator: &'static str,
    pub version: &'static str,
}

impl EntropyReport {
    fn compute() -> Self {
        let p_a_lambda = zone_prob_avg(Zone::ALambda);
        let p_a_mu = zone_prob_avg(Zone::AMu);
        let p_a_nu = zone_prob_avg(Zone::ANu);
        let p_r = zone_prob_avg(Zone::Reject);
        let q = q_values();
        let p_a = p_a_lambda + p_a_mu + p_a_nu;
        let h = (q.accept_total() + q.r) / p_a;
        let total_vn = h + 1.0;
        EntropyReport {
            p_a_lambda,
            p_a_mu,
            p_a_nu,
            p_a,
            p_r,
            q_a_lambda: q.a_lambda,
            q_a_mu: q.a_mu,
            q_a_nu: q.a_nu,
            q_r: q.r,
            h,
            total_vn,
            singlet_bits: h,
            total_povm: povm_expected_cost(total_vn),
            inner_tolerance: INNER_TOL,
            outer_tolerance: OUTER_TOL,
            generator: GENERATOR,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn q_values(&self) -> QValues {
        QValues {
            a_lambda: self.q_a_lambda,
            a_mu: self.q_a_mu,
            a_nu: self.q_a_nu,
            r: self.q_r,
        }
    }
}

/// The entropy report, computed on first use.
pub fn entropy_report() -> &'static EntropyReport {
    static REPORT: OnceLock<EntropyReport> = OnceLock::new();
    REPORT.get_or_init(EntropyReport::compute)
}

/// `2 (total_vn + 1)`: two rounds on average, each carrying Alice's message
/// and Bob's reply bit.
pub fn povm_expected_cost(total_vn: f64) -> f64 {
    2.0 * (total_vn + 1.0)
}

/// The double sum `Σ_k Σ_l [(k-1) p_R^(k-2) p_Al q_R + p_R^(k-1) q_Al]`
/// truncated at `k_max`.
pub fn entropy_series(p_accept: [f64; 3], p_r: f64, q: &QValues, k_max: u32) -> f64 {
    let q_accept = [q.a_lambda, q.a_mu, q.a_nu];
    let mut total = 0.0;
    for k in 1..=k_max {
        for l in 0..3 {
            let reject_part = if k >= 2 {
                (k - 1) as f64 * p_r.powi(k as i32 - 2) * p_accept[l] * q.r
            } else {
                0.0
            };
            total += reject_part + p_r.powi(k as i32 - 1) * q_accept[l];
        }
    }
    total
}

/// Zone probabilities on a fixed grid, linearly interpolated. Used where
/// millions of evaluations are needed (code lengths, the block coder).
///
/// `p_z(u)` has slope discontinuities at `u = 1` and `u = √2`, so the grid is
/// uniform on each of `[0, 1]`, `[1, √2]`, `[√2, √3]` with knots exactly on
/// those points.
#[derive(Debug)]
pub struct ZoneProbTable {
    per_segment: usize,
    // [A_mu, A_nu, R] per knot, segment after segment; A_lambda is closed form.
    values: Vec<[f64; 3]>,
}

impl ZoneProbTable {
    /// `intervals` is split evenly over the three segments.
    pub fn build(intervals: usize) -> Self {
        let per_segment = (intervals / 3).max(1);
        let values = (0..3 * (per_segment + 1))
            .into_par_iter()
            .map(|idx| {
                let u = Self::knot(
                    per_segment,
                    idx / (per_segment + 1),
                    idx % (per_segment + 1),
                );
                [
                    zone_prob_estimate(Zone::AMu, u).value,
                    zone_prob_estimate(Zone::ANu, u).value,
                    zone_prob_estimate(Zone::Reject, u).value,
                ]
            })
            .collect();
        ZoneProbTable {
            per_segment,
            values,
        }
    }

    fn knot(per_segment: usize, seg: usize, i: usize) -> f64 {
        let (lo, hi) = (U_BREAKS[seg], U_BREAKS[seg + 1]);
        if i == per_segment {
            hi
        } else {
            lo + (hi - lo) * i as f64 / per_segment as f64
        }
    }

    /// Process-wide table with [`TABLE_INTERVALS`] intervals.
    ///
    /// The first call often comes from inside a rayon job. A worker that
    /// waits on rayon work keeps stealing jobs, possibly one that calls
    /// `global()` again, so the build runs on a plain thread with its own
    /// pool and the caller blocks on the join.
    pub fn global() -> &'static ZoneProbTable {
        static TABLE: OnceLock<ZoneProbTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            std::thread::scope(|s| {
                s.spawn(|| match rayon::ThreadPoolBuilder::new().build() {
                    Ok(pool) => pool.install(|| ZoneProbTable::build(TABLE_INTERVALS)),
                    Err(_) => ZoneProbTable::build(TABLE_INTERVALS),
                })
                .join()
                .expect("table build panicked")
            })
        })
    }

    pub fn intervals(&self) -> usize {
        3 * self.per_segment
    }

    /// Probabilities in [`Zone::ALL`] order.
    pub fn probs(&self, u: f64) -> [f64; 4] {
        let u = u.clamp(0.0, U_MAX);
        let seg = if u < U_BREAKS[1] {
            0
        } else if u < U_BREAKS[2] {
            1
        } else {
            2
        };
        let (lo, hi) = (U_BREAKS[seg], U_BREAKS[seg + 1]);
        let pos = (u - lo) / (hi - lo) * self.per_segment as f64;
        let i = (pos.floor() as usize).min(self.per_segment - 1);
        let t = (pos - i as f64).clamp(0.0, 1.0);
        let base = seg * (self.per_segment + 1) + i;
        let (a, b) = (&self.values[base], &self.values[base + 1]);
        let lerp = |j: usize| a[j] + t * (b[j] - a[j]);
        [(1.0 - u).max(0.0), lerp(0), lerp(1), lerp(2)]
    }

    pub fn prob(&self, zone: Zone, u: f64) -> f64 {
        let p = self.probs(u);
        match zone {
            Zone::ALambda => p[0],
            Zone::AMu => p[1],
            Zone::ANu => p[2],
            Zone::Reject => p[3],
        }
    }
}

fn neg_log2(p: f64) -> f64 {
    -p.max(f64::MIN_POSITIVE).log2()
}

/// Ideal code length of one message given that Bob already knows every `u`:
/// `-log₂[p_R(u_first) ⋯ p_R(u_{k-1}) p_Al(u_k)]`. `first` is the record at
/// which this scan started (1 for the first message of a session).
pub fn message_codelength<S: RecordSource + ?Sized>(
    first: u64,
    msg: &AliceMessage,
    source: &S,
    table: &ZoneProbTable,
) -> f64 {
    let mut bits = 0.0;
    for i in first..msg.k {
        bits += neg_log2(table.prob(Zone::Reject, source.record(i).u));
    }
    bits + neg_log2(table.prob(msg.label.zone(), source.record(msg.k).u))
}

/// Sum of [`message_codelength`] over every message of a transcript. Sign
/// and reply bits are not included.
pub fn ideal_codelength<S: RecordSource + ?Sized>(t: &SessionTranscript, source: &S) -> f64 {
    let table = ZoneProbTable::global();
    let mut first = 1;
    let mut bits = 0.0;
    for msg in &t.messages {
        bits += message_codelength(first, msg, source, table);
        first = msg.k + 1;
    }
    bits
}

/// Fills `t.ideal_bits` and returns it.
pub fn annotate<S: RecordSource + ?Sized>(t: &mut SessionTranscript, source: &S) -> f64 {
    let bits = ideal_codelength(t, source);
    t.ideal_bits = Some(bits);
    bits
}

/// Fidelity reached by running the full protocol (cost `full_cost` bits,
/// fidelity 1) on a fraction of sessions and the hidden-variable-only
/// baseline (no bits, fidelity 1/2) on the rest, spending `avg_bits` per
/// session on average.
pub fn fidelity_budget(avg_bits: f64, full_cost: f64) -> f64 {
    assert!(full_cost > 0.0, "full protocol cost must be positive");
    let bits = if avg_bits > full_cost {
        warn!("budget {avg_bits} exceeds the full protocol cost {full_cost}; clamping");
        full_cost
    } else if avg_bits.is_nan() || avg_bits < 0.0 {
        warn!("budget {avg_bits} is negative; clamping to 0");
        0.0
    } else {
        avg_bits
    };
    (bits + (full_cost - bits) * 0.5) / full_cost
}
