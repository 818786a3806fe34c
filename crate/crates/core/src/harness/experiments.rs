use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coding::{decode_block, encode_block_checked};
use crate::cost::{annotate, entropy_report, fidelity_budget, message_codelength, ZoneProbTable};
use crate::geometry::{sample_unit_vector, UnitVec3};
use crate::lhv::{session_seed, LhvStream, SessionStreams};
use crate::protocol::wire::message_bits;
use crate::protocol::{
    alice_select, run_povm_session, run_singlet_session, run_vn_session, BlochState, Sign,
    VnMeasurement,
};
use crate::stats::{binomial_se, Moments};

use super::report::{Check, StatsReport};
use super::{aux_rng, fold_batches, ExperimentConfig, HarnessError};

const TAG_A: u64 = 0;
const TAG_B: u64 = 1;
const TAG_SWEEP: u64 = 2;

fn vector_or_draw(v: Option<UnitVec3>, master: u64, tag: u64) -> UnitVec3 {
    v.unwrap_or_else(|| sample_unit_vector(&mut aux_rng(master, tag)))
}

/// Alice's state for one coding session when none is configured.
fn session_state(seed: u64) -> UnitVec3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    sample_unit_vector(&mut rng)
}

#[derive(Clone, Copy, Debug, Default)]
struct VnTally {
    plus: u64,
    n: u64,
    bits: Moments,
    records: Moments,
}

impl VnTally {
    fn merge(&mut self, o: &VnTally) {
        self.plus += o.plus;
        self.n += o.n;
        self.bits.merge(&o.bits);
        self.records.merge(&o.records);
    }
}

/// `with_bits` also computes each session's ideal code length.
fn run_vn(
    master: u64,
    trials: u64,
    a: UnitVec3,
    b: UnitVec3,
    with_bits: bool,
) -> Result<VnTally, HarnessError> {
    let streams = SessionStreams::new(master);
    let (a, b) = (BlochState::new(a), VnMeasurement::new(b));
    let parts = fold_batches(trials, |range| {
        let mut t = VnTally::default();
        for i in range {
            let seed = streams.seed(i);
            let (out, mut tr) = run_vn_session(&a, &b, seed)?;
            t.n += 1;
            t.plus += (out == Sign::Plus) as u64;
            if with_bits {
                t.bits.push(annotate(&mut tr, &LhvStream::new(seed)));
            }
            t.records.push(tr.records_consumed as f64);
        }
        Ok::<_, HarnessError>(t)
    })?;
    let mut total = VnTally::default();
    parts.iter().for_each(|p| total.merge(p));
    Ok(total)
}

/// Von Neumann measurement statistics for one `(a, b)` pair.
pub fn verify_vn(cfg: &ExperimentConfig) -> Result<StatsReport, HarnessError> {
    cfg.validate()?;
    let a = vector_or_draw(cfg.a, cfg.master_seed, TAG_A);
    let b = vector_or_draw(cfg.b, cfg.master_seed, TAG_B);
    let t = run_vn(cfg.master_seed, cfg.trials, a, b, true)?;
    let h = entropy_report().h;
    let p = (1.0 + a.dot(b)) / 2.0;

    let mut r = StatsReport::new("vn", cfg.trials, cfg.master_seed);
    r.set_outcomes(
        &["+".into(), "-".into()],
        &[t.plus, t.n - t.plus],
        &[p, 1.0 - p],
    );
    let freq = t.plus as f64 / t.n as f64;
    r.push(Check::sigmas(
        "p_plus",
        freq,
        p,
        binomial_se(p, t.n),
        cfg.tolerance_sigmas,
    ));
    r.push(Check::sigmas(
        "mean_ideal_bits",
        t.bits.mean,
        h,
        t.bits.std_error(),
        cfg.tolerance_sigmas,
    ));
    r.mean_ideal_bits = Some(t.bits.mean);
    r.values.insert("a_dot_b".into(), a.dot(b));
    r.values.insert("mean_records".into(), t.records.mean);
    Ok(r.finish())
}

/// Pass rule for a sweep over random pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRule {
    pub pairs: u64,
    pub sigmas: f64,
    pub min_within: u64,
}

impl Default for SweepRule {
    fn default() -> Self {
        SweepRule {
            pairs: 100,
            sigmas: 5.0,
            min_within: 99,
        }
    }
}

/// Runs `cfg.trials` sessions for each of `rule.pairs` random `(a, b)` pairs
/// and passes when at least `rule.min_within` pairs land within
/// `rule.sigmas` binomial standard errors.
pub fn verify_vn_sweep(
    cfg: &ExperimentConfig,
    rule: SweepRule,
) -> Result<StatsReport, HarnessError> {
    cfg.validate()?;
    let mut rng = aux_rng(cfg.master_seed, TAG_SWEEP);
    let mut r = StatsReport::new("vn_sweep", cfg.trials, cfg.master_seed);
    let mut within = 0;
    let mut worst: f64 = 0.0;
    for pair in 0..rule.pairs {
        let a = sample_unit_vector(&mut rng);
        let b = sample_unit_vector(&mut rng);
        let t = run_vn(
            session_seed(cfg.master_seed, u64::MAX - pair),
            cfg.trials,
            a,
            b,
            false,
        )?;
        let p = (1.0 + a.dot(b)) / 2.0;
        let c = Check::sigmas(
            &format!("pair_{pair}"),
            t.plus as f64 / t.n as f64,
            p,
            binomial_se(p, t.n),
            rule.sigmas,
        );
        within += c.pass as u64;
        worst = worst.max(c.deviation);
        r.values.insert(format!("pair_{pair}_sigmas"), c.deviation);
    }
    r.push(Check::at_least(
        "pairs_within",
        within as f64,
        rule.min_within as f64,
    ));
    r.values.insert("worst_sigmas".into(), worst);
    let mut r = r.finish();
    r.max_sigmas = worst;
    Ok(r)
}

#[derive(Clone, Copy, Debug, Default)]
struct SingletTally {
    // index: 2 * (alpha == -) + (beta == -)
    counts: [u64; 4],
    bits: Moments,
}

/// Singlet correlations, marginals and the `(k, l)` code length.
pub fn verify_singlet(cfg: &ExperimentConfig) -> Result<StatsReport, HarnessError> {
    cfg.validate()?;
    let a = vector_or_draw(cfg.a, cfg.master_seed, TAG_A);
    let b = vector_or_draw(cfg.b, cfg.master_seed, TAG_B);
    let streams = SessionStreams::new(cfg.master_seed);
    let (sa, mb) = (BlochState::new(a), VnMeasurement::new(b));
    let parts = fold_batches(cfg.trials, |range| {
        let mut t = SingletTally::default();
        for i in range {
            let seed = streams.seed(i);
            let (o, mut tr) = run_singlet_session(&sa, &mb, seed)?;
            let idx = 2 * (o.alpha == Sign::Minus) as usize + (o.beta == Sign::Minus) as usize;
            t.counts[idx] += 1;
            t.bits.push(annotate(&mut tr, &LhvStream::new(seed)));
        }
        Ok::<_, HarnessError>(t)
    })?;
    let mut t = SingletTally::default();
    for p in &parts {
        (0..4).for_each(|i| t.counts[i] += p.counts[i]);
        t.bits.merge(&p.bits);
    }

    let n = cfg.trials;
    let ab = a.dot(b);
    let same = t.counts[0] + t.counts[3];
    let e = (same as f64 - (n - same) as f64) / n as f64;
    let e_se = ((1.0 - ab * ab).max(0.0) / n as f64).sqrt();
    let alpha_plus = (t.counts[0] + t.counts[1]) as f64 / n as f64;
    let beta_plus = (t.counts[0] + t.counts[2]) as f64 / n as f64;
    let h = entropy_report().h;

    let mut r = StatsReport::new("singlet", n, cfg.master_seed);
    let labels = ["++", "+-", "-+", "--"].map(String::from);
    let expected = [
        (1.0 - ab) / 4.0,
        (1.0 + ab) / 4.0,
        (1.0 + ab) / 4.0,
        (1.0 - ab) / 4.0,
    ];
    r.set_outcomes(&labels, &t.counts, &expected);
    let s = cfg.tolerance_sigmas;
    r.push(Check::sigmas("correlator", e, -ab, e_se, s));
    r.push(Check::sigmas(
        "alpha_plus",
        alpha_plus,
        0.5,
        binomial_se(0.5, n),
        s,
    ));
    r.push(Check::sigmas(
        "beta_plus",
        beta_plus,
        0.5,
        binomial_se(0.5, n),
        s,
    ));
    r.push(Check::sigmas(
        "mean_ideal_bits",
        t.bits.mean,
        h,
        t.bits.std_error(),
        s,
    ));
    r.mean_ideal_bits = Some(t.bits.mean);
    r.values.insert("a_dot_b".into(), ab);
    r.values.insert("correlator".into(), e);
    Ok(r.finish())
}

#[derive(Clone, Debug, Default)]
struct PovmTally {
    counts: Vec<u64>,
    iterations: Moments,
    ideal_bits: Moments,
    total_bits: Moments,
}

/// POVM outcome frequencies, rounds per session and bits per session.
pub fn verify_povm(cfg: &ExperimentConfig) -> Result<StatsReport, HarnessError> {
    cfg.validate()?;
    let povm = cfg.load_povm()?;
    let a = vector_or_draw(cfg.a, cfg.master_seed, TAG_A);
    let streams = SessionStreams::new(cfg.master_seed);
    let state = BlochState::new(a);
    let m = povm.len();
    let parts = fold_batches(cfg.trials, |range| {
        let mut t = PovmTally {
            counts: vec![0; m],
            ..Default::default()
        };
        for i in range {
            let seed = streams.seed(i);
            let (j, mut tr) = run_povm_session(&state, &povm, seed)?;
            t.counts[j] += 1;
            t.iterations.push(tr.iterations as f64);
            let ideal = annotate(&mut tr, &LhvStream::new(seed));
            t.ideal_bits.push(ideal);
            t.total_bits.push(ideal + tr.raw_bits() as f64);
        }
        Ok::<_, HarnessError>(t)
    })?;
    let mut t = PovmTally {
        counts: vec![0; m],
        ..Default::default()
    };
    for p in &parts {
        (0..m).for_each(|j| t.counts[j] += p.counts[j]);
        t.iterations.merge(&p.iterations);
        t.ideal_bits.merge(&p.ideal_bits);
        t.total_bits.merge(&p.total_bits);
    }

    let n = cfg.trials;
    let expected = povm.expected_probabilities(a);
    let rep = entropy_report();
    let s = cfg.tolerance_sigmas;
    let mut r = StatsReport::new("povm", n, cfg.master_seed);
    let labels: Vec<String> = (0..m).map(|j| format!("element_{j}")).collect();
    r.set_outcomes(&labels, &t.counts, &expected);
    for (j, (&c, &p)) in t.counts.iter().zip(&expected).enumerate() {
        r.push(Check::sigmas(
            &labels[j],
            c as f64 / n as f64,
            p,
            binomial_se(p, n),
            s,
        ));
    }
    r.push(Check::sigmas(
        "mean_iterations",
        t.iterations.mean,
        2.0,
        t.iterations.std_error(),
        s,
    ));
    r.push(Check::sigmas(
        "mean_total_bits",
        t.total_bits.mean,
        rep.total_povm,
        t.total_bits.std_error(),
        s,
    ));
    r.mean_iterations = Some(t.iterations.mean);
    r.mean_ideal_bits = Some(t.ideal_bits.mean);
    r.values.insert("expected_cost".into(), rep.total_povm);
    r.values.insert("mean_total_bits".into(), t.total_bits.mean);
    Ok(r.finish())
}

/// Codes `cfg.trials` sessions as one block, decodes it and compares the
/// rate with the entropy and with the uncoded wire format.
pub fn verify_coding(cfg: &ExperimentConfig) -> Result<StatsReport, HarnessError> {
    cfg.validate()?;
    let streams = SessionStreams::new(cfg.master_seed);
    let table = ZoneProbTable::global();
    let parts = fold_batches(cfg.trials, |range| {
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for i in range {
            let seed = streams.seed(i);
            let a = BlochState::new(cfg.a.unwrap_or_else(|| session_state(seed)));
            let mut stream = LhvStream::new(seed);
            let msg = alice_select(&a, &mut stream)?.message;
            let ideal = message_codelength(1, &msg, &stream, table);
            out.push((a, msg, ideal));
        }
        Ok::<_, HarnessError>(out)
    })?;
    let entries: Vec<_> = parts.into_iter().flatten().collect();
    let states: Vec<BlochState> = entries.iter().map(|e| e.0).collect();
    let messages: Vec<_> = entries.iter().map(|e| e.1).collect();
    let ideal: f64 = entries.iter().map(|e| e.2).sum();

    let block = encode_block_checked(&states, &messages, &streams)?;
    let decoded = decode_block(&block, &streams)?;
    let n = cfg.trials as f64;
    let rate = block.payload_bits as f64 / n;
    let naive = messages.iter().map(message_bits).sum::<u64>() as f64 / n;
    let h = entropy_report().h;

    let mut r = StatsReport::new("coding", cfg.trials, cfg.master_seed);
    r.push(Check::absolute(
        "lossless",
        (decoded == messages) as u8 as f64,
        1.0,
        0.0,
    ));
    r.push(Check::at_most("payload_rate", rate, h, 0.05));
    r.push(Check::at_most("coder_overhead", rate, ideal / n, 0.05));
    r.push(Check::at_least("naive_over_coded", naive, rate + 1.0));
    r.mean_ideal_bits = Some(ideal / n);
    r.values
        .insert("payload_bits".into(), block.payload_bits as f64);
    r.values.insert("payload_bits_per_session".into(), rate);
    r.values.insert(
        "sign_bits_per_session".into(),
        (block.total_bits() - block.payload_bits) as f64 / n,
    );
    r.values.insert(
        "total_bits_per_session".into(),
        block.total_bits() as f64 / n,
    );
    r.values.insert("naive_bits_per_session".into(), naive);
    r.values.insert("h".into(), h);
    r.values
        .insert("block_bytes".into(), block.to_bytes().len() as f64);
    Ok(r.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    pub budget: f64,
    pub full_cost: f64,
    pub fidelity: f64,
    pub baseline_fidelity: f64,
}

pub fn fidelity_report(cfg: &ExperimentConfig) -> FidelityReport {
    let full_cost = cfg.full_cost.unwrap_or(entropy_report().total_vn);
    FidelityReport {
        budget: cfg.budget,
        full_cost,
        fidelity: fidelity_budget(cfg.budget, full_cost),
        baseline_fidelity: 0.5,
    }
}
