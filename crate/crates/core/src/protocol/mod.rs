//! The two-party protocol.
//!
//! Alice knows the state `a` and scans the shared records until one is
//! accepted; she sends the index `k`, which of the three vectors was
//! accepted, and the sign of `a` along it. Bob knows only his measurement and
//! the shared records. Everything Bob does lives in [`bob`], whose functions
//! never receive a [`BlochState`].

pub mod alice;
pub mod bob;
pub mod povm;
pub mod session;
pub mod wire;
mod zone;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::UnitVec3;

pub use alice::{alice_select, scan, Selection};
pub use povm::{validate_povm, Povm, PovmElement, PovmError};
pub use session::{
    run_povm_session, run_singlet_session, run_vn_session, SessionKind, SessionTranscript,
    SingletOutcome,
};
pub use zone::{thresholds, zone_of, Label, Sign, Zone};

/// Records Alice may scan before giving up. Rejection has probability
/// (2-√3)/2 per record, so reaching this is a bug, not bad luck.
pub const DEFAULT_ITERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("non-termination: no acceptance within {cap} iterations")]
    NonTermination { cap: u64 },
    #[error(transparent)]
    Povm(#[from] PovmError),
}

/// The state Alice is asked to send, as a Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochState(UnitVec3);

impl BlochState {
    pub fn new(a: UnitVec3) -> Self {
        BlochState(a)
    }

    pub fn vector(&self) -> UnitVec3 {
        self.0
    }
}

/// A von Neumann measurement along `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VnMeasurement(UnitVec3);

impl VnMeasurement {
    pub fn new(b: UnitVec3) -> Self {
        VnMeasurement(b)
    }

    pub fn axis(&self) -> UnitVec3 {
        self.0
    }
}

/// What Alice sends for one accepted record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AliceMessage {
    /// 1-based index of the accepted record.
    pub k: u64,
    pub label: Label,
    pub sign: Sign,
}
