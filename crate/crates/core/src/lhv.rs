//! Shared local hidden variables.
//!
//! Both parties hold the same seed. Record `k` of a stream is a pure function
//! of `(seed, k)`: it is drawn from ChaCha8 keyed by the seed, using ChaCha
//! stream number `k`. Bob can therefore jump straight to the record named in
//! Alice's message without replaying earlier ones. Stream number 0 is never
//! used for records and is reserved for Bob's private draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{sample_triplet, OrthoTriplet};

/// Upper end of the shared uniform variable `u`, i.e. √3.
pub const U_MAX: f64 = 1.732_050_807_568_877_2;

/// Human-readable description of the generator, recorded in every report.
pub const GENERATOR: &str =
    "ChaCha8 (rand_chacha 0.9), seed_from_u64(session seed), ChaCha stream k per record";

/// One shared record `(λ_k, μ_k, ν_k, u_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LhvRecord {
    pub triplet: OrthoTriplet,
    pub u: f64,
}

/// Random access to the shared records of one session.
pub trait RecordSource {
    /// Record at 1-based index `k`.
    fn record(&self, k: u64) -> LhvRecord;
}

/// Deterministic record `k` of the stream keyed by `seed`.
pub fn record_at(seed: u64, k: u64) -> LhvRecord {
    debug_assert!(k >= 1, "record indices start at 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let triplet = sample_triplet(&mut rng);
    let u = rng.random::<f64>() * U_MAX;
    LhvRecord { triplet, u }
}

/// A replayable stream of shared records with a read cursor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LhvStream {
    seed: u64,
    cursor: u64,
}

impl LhvStream {
    pub fn new(seed: u64) -> Self {
        LhvStream { seed, cursor: 1 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of the record that [`next_record`](Self::next_record) returns next.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn seek(&mut self, k: u64) {
        assert!(k >= 1, "record indices start at 1");
        self.cursor = k;
    }

    pub fn next_record(&mut self) -> LhvRecord {
        let r = record_at(self.seed, self.cursor);
        self.cursor += 1;
        r
    }
}

impl RecordSource for LhvStream {
    fn record(&self, k: u64) -> LhvRecord {
        record_at(self.seed, k)
    }
}

/// Hand-built records for tests and demonstrations. Indices past the end of
/// the script repeat the final record.
#[derive(Clone, Debug)]
pub struct ScriptedRecords {
    records: Vec<LhvRecord>,
}

impl ScriptedRecords {
    pub fn new(records: Vec<LhvRecord>) -> Self {
        assert!(!records.is_empty(), "script needs at least one record");
        ScriptedRecords { records }
    }
}

impl RecordSource for ScriptedRecords {
    fn record(&self, k: u64) -> LhvRecord {
        let i = (k.max(1) - 1) as usize;
        self.records[i.min(self.records.len() - 1)]
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for session `index` of a run with `master` seed:
/// `splitmix64(splitmix64(master) ^ index)`.
pub fn session_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// Per-session streams of a run, indexed by session number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SessionStreams {
    pub master_seed: u64,
}

impl SessionStreams {
    pub fn new(master_seed: u64) -> Self {
        SessionStreams { master_seed }
    }

    pub fn seed(&self, index: u64) -> u64 {
        session_seed(self.master_seed, index)
    }

    pub fn stream(&self, index: u64) -> LhvStream {
        LhvStream::new(self.seed(index))
    }
}

/// Bob's private randomness for a session (ChaCha stream 0 of the session key).
pub fn private_rng(session_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(session_seed);
    rng.set_stream(0);
    rng
}

/// Records whose hidden frame is a fixed triplet, handy for tests that need
/// exact zone placement. `frame` may be any orthonormal frame, e.g. one made
/// from [`OrthoTriplet::new`].
pub fn fixed_record(frame: OrthoTriplet, u: f64) -> LhvRecord {
    assert!((0.0..=U_MAX).contains(&u), "u outside [0, √3]");
    LhvRecord { triplet: frame, u }
}
