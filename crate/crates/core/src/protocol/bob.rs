//! Bob's side of every variant.
//!
//! Inputs here are limited to Bob's own measurement, Alice's message and the
//! shared records. This file must not mention Alice's state type; an
//! integration test checks that.

use rand::Rng;

use crate::geometry::UnitVec3;
use crate::lhv::RecordSource;

use super::{AliceMessage, Label, Povm, Sign, VnMeasurement};

/// The accepted vector named by `(k, label)`, as Bob rebuilds it from the
/// shared records.
pub fn accepted_vector<S: RecordSource + ?Sized>(k: u64, label: Label, source: &S) -> UnitVec3 {
    label.pick(&source.record(k).triplet)
}

/// The accepted vector flipped onto Alice's hemisphere.
pub fn reconstruct<S: RecordSource + ?Sized>(msg: &AliceMessage, source: &S) -> UnitVec3 {
    msg.sign.apply(accepted_vector(msg.k, msg.label, source))
}

/// Outcome of measuring along `b`: the sign of `b·λ'`.
pub fn bob_vn_outcome<S: RecordSource + ?Sized>(
    b: &VnMeasurement,
    msg: &AliceMessage,
    source: &S,
) -> Sign {
    Sign::of(b.axis().dot(reconstruct(msg, source)))
}

/// Singlet variant: Bob only learns `(k, label)` and uses the unflipped vector.
pub fn bob_singlet_outcome<S: RecordSource + ?Sized>(
    b: &VnMeasurement,
    k: u64,
    label: Label,
    source: &S,
) -> Sign {
    Sign::of(b.axis().dot(accepted_vector(k, label, source)))
}

/// Bob's reply to one POVM round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmReply {
    /// Outcome `j` accepted; reply bit 0.
    Accept(usize),
    /// Candidate inconsistent with λ'; reply bit 1.
    Retry,
}

impl PovmReply {
    pub fn bit(self) -> u8 {
        match self {
            PovmReply::Accept(_) => 0,
            PovmReply::Retry => 1,
        }
    }
}

/// One POVM round: draw a candidate with probability `|b_j|/2` from Bob's
/// private randomness, accept iff `λ'·b_j ≥ 0`.
pub fn bob_povm_round<S: RecordSource + ?Sized, R: Rng + ?Sized>(
    povm: &Povm,
    msg: &AliceMessage,
    source: &S,
    rng: &mut R,
) -> PovmReply {
    let lambda = reconstruct(msg, source);
    let j = povm.draw_candidate(rng);
    if lambda.dot_vec(povm.elements()[j].bvec) >= 0.0 {
        PovmReply::Accept(j)
    } else {
        PovmReply::Retry
    }
}
