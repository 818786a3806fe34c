//! Complete sessions: one simulated qubit from preparation to Bob's outcome.

use serde::Serialize;

use crate::lhv::{private_rng, LhvStream};

use super::bob::{self, PovmReply};
use super::{
    scan, AliceMessage, BlochState, Povm, ProtocolError, Sign, VnMeasurement, DEFAULT_ITERATION_CAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SessionKind {
    VonNeumann,
    Singlet,
    Povm,
}

/// Everything that crossed the channel in one session.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionTranscript {
    pub kind: SessionKind,
    pub seed: u64,
    pub messages: Vec<AliceMessage>,
    /// Bob's reply bits, POVM sessions only. 0 = outcome chosen, 1 = retry.
    pub replies: Vec<u8>,
    /// Index of the last record Alice examined.
    pub records_consumed: u64,
    pub iterations: u32,
    /// Ideal side-information code length of the messages, excluding sign
    /// and reply bits. Filled in by [`crate::cost::annotate`].
    pub ideal_bits: Option<f64>,
}

impl SessionTranscript {
    fn new(kind: SessionKind, seed: u64) -> Self {
        SessionTranscript {
            kind,
            seed,
            messages: Vec::with_capacity(1),
            replies: Vec::new(),
            records_consumed: 0,
            iterations: 0,
            ideal_bits: None,
        }
    }

    /// Raw bits the protocol sends besides the coded `(k, l)` part:
    /// sign bits (not in the singlet variant) and reply bits.
    pub fn raw_bits(&self) -> u64 {
        let signs = match self.kind {
            SessionKind::Singlet => 0,
            _ => self.messages.len() as u64,
        };
        signs + self.replies.len() as u64
    }

    /// Structural invariants of a finished transcript.
    pub fn is_well_formed(&self) -> bool {
        match self.kind {
            SessionKind::VonNeumann | SessionKind::Singlet => {
                self.messages.len() == 1 && self.replies.is_empty() && self.iterations == 1
            }
            SessionKind::Povm => {
                let n = self.replies.len();
                n == self.iterations as usize
                    && n == self.messages.len()
                    && n >= 1
                    && self.replies[n - 1] == 0
                    && self.replies[..n - 1].iter().all(|&r| r == 1)
                    && self.messages.windows(2).all(|w| w[0].k < w[1].k)
            }
        }
    }
}

/// One von Neumann session. Alice and Bob each build their own copy of the
/// shared stream from `session_seed`.
pub fn run_vn_session(
    a: &BlochState,
    b: &VnMeasurement,
    session_seed: u64,
) -> Result<(Sign, SessionTranscript), ProtocolError> {
    let alice_stream = LhvStream::new(session_seed);
    let sel = scan(a, &alice_stream, 1, DEFAULT_ITERATION_CAP)?;

    let bob_stream = LhvStream::new(session_seed);
    let outcome = bob::bob_vn_outcome(b, &sel.message, &bob_stream);

    let mut t = SessionTranscript::new(SessionKind::VonNeumann, session_seed);
    t.messages.push(sel.message);
    t.records_consumed = sel.message.k;
    t.iterations = 1;
    Ok((outcome, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SingletOutcome {
    pub alpha: Sign,
    pub beta: Sign,
}

/// Singlet simulation: Alice outputs `-sign(a·v)`, Bob measures the unflipped
/// accepted vector. Only `(k, l)` is sent.
pub fn run_singlet_session(
    a: &BlochState,
    b: &VnMeasurement,
    session_seed: u64,
) -> Result<(SingletOutcome, SessionTranscript), ProtocolError> {
    let alice_stream = LhvStream::new(session_seed);
    let sel = scan(a, &alice_stream, 1, DEFAULT_ITERATION_CAP)?;
    let alpha = sel.message.sign.flip();

    let bob_stream = LhvStream::new(session_seed);
    let beta = bob::bob_singlet_outcome(b, sel.message.k, sel.message.label, &bob_stream);

    let mut t = SessionTranscript::new(SessionKind::Singlet, session_seed);
    t.messages.push(sel.message);
    t.records_consumed = sel.message.k;
    t.iterations = 1;
    Ok((SingletOutcome { alpha, beta }, t))
}

/// Two-way POVM session. Each round Alice resumes scanning right after her
/// previous acceptance; Bob answers 0 (done) or 1 (retry).
pub fn run_povm_session(
    a: &BlochState,
    povm: &Povm,
    session_seed: u64,
) -> Result<(usize, SessionTranscript), ProtocolError> {
    let alice_stream = LhvStream::new(session_seed);
    let bob_stream = LhvStream::new(session_seed);
    let mut bob_rng = private_rng(session_seed);

    let mut t = SessionTranscript::new(SessionKind::Povm, session_seed);
    let mut next = 1;
    for _ in 0..DEFAULT_ITERATION_CAP {
        let sel = scan(a, &alice_stream, next, DEFAULT_ITERATION_CAP)?;
        next = sel.message.k + 1;
        t.messages.push(sel.message);
        t.records_consumed = sel.message.k;
        t.iterations += 1;

        let reply = bob::bob_povm_round(povm, &sel.message, &bob_stream, &mut bob_rng);
        t.replies.push(reply.bit());
        if let PovmReply::Accept(j) = reply {
            return Ok((j, t));
        }
    }
    Err(ProtocolError::NonTermination {
        cap: DEFAULT_ITERATION_CAP,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitVec3;

    #[test]
    fn aligned_vn_is_deterministic() {
        let a = BlochState::new(UnitVec3::Z);
        let b = VnMeasurement::new(UnitVec3::Z);
        for seed in 0..10_000 {
            let (o, t) = run_vn_session(&a, &b, seed).unwrap();
            assert_eq!(o, Sign::Plus);
            assert!(t.is_well_formed());
        }
    }

    #[test]
    fn antialigned_vn_always_minus() {
        let a = BlochState::new(UnitVec3::Z);
        let b = VnMeasurement::new(-UnitVec3::Z);
        for seed in 0..1000 {
            assert_eq!(run_vn_session(&a, &b, seed).unwrap().0, Sign::Minus);
        }
    }

    #[test]
    fn singlet_aligned_perfect_anticorrelation() {
        let a = BlochState::new(UnitVec3::Y);
        let b = VnMeasurement::new(UnitVec3::Y);
        for seed in 0..10_000 {
            let (o, t) = run_singlet_session(&a, &b, seed).unwrap();
            assert_eq!(o.alpha * o.beta, Sign::Minus);
            assert_eq!(t.raw_bits(), 0);
        }
    }

    #[test]
    fn povm_transcripts_well_formed() {
        let a = BlochState::new(UnitVec3::X);
        let p = Povm::trine(UnitVec3::Z, UnitVec3::X);
        for seed in 0..2000 {
            let (j, t) = run_povm_session(&a, &p, seed).unwrap();
            assert!(j < 3);
            assert!(t.is_well_formed(), "{t:?}");
            assert_eq!(t.raw_bits(), 2 * t.iterations as u64);
        }
    }

    #[test]
    fn projective_povm_aligned() {
        let a = BlochState::new(UnitVec3::Z);
        let p = Povm::projective(UnitVec3::Z);
        for seed in 0..10_000 {
            assert_eq!(run_povm_session(&a, &p, seed).unwrap().0, 0);
        }
    }

    #[test]
    fn sessions_replay() {
        let a = BlochState::new(UnitVec3::X);
        let p = Povm::trine(UnitVec3::Z, UnitVec3::X);
        assert_eq!(
            run_povm_session(&a, &p, 77).unwrap(),
            run_povm_session(&a, &p, 77).unwrap()
        );
    }
}
