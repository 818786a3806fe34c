//! Classical teleportation of a known qubit.
//!
//! Alice is given a Bloch vector `a`, Bob picks a measurement. The two share
//! an unbounded list of random orthonormal triplets and uniform numbers `u`
//! in `[0, √3]`. Alice rejects triplets until `u` falls in one of three
//! acceptance zones and then sends Bob the accepted index, which of the three
//! vectors was accepted and one sign bit. From this Bob reproduces the
//! quantum outcome statistics of any von Neumann measurement, and of any
//! POVM with a short two-way exchange.
//!
//! Modules:
//!
//! - [`geometry`]: Bloch vectors and Haar-random frames.
//! - [`lhv`]: the seed-replayable shared records.
//! - [`protocol`]: zones, Alice and Bob, the von Neumann, singlet and POVM
//!   sessions, and the naive wire format.
//! - [`cost`]: zone probabilities, conditional entropy and code lengths.
//! - [`coding`]: an arithmetic coder that uses Bob's side information.
//! - [`harness`]: Monte Carlo verification and the CLI plumbing.

pub mod bits;
pub mod coding;
pub mod cost;
pub mod geometry;
pub mod harness;
pub mod lhv;
pub mod protocol;
pub mod quadrature;
pub mod stats;

pub use geometry::{OrthoTriplet, UnitVec3, Vec3};
pub use lhv::{LhvRecord, LhvStream, RecordSource, SessionStreams};
pub use protocol::{AliceMessage, BlochState, Povm, Sign, VnMeasurement, Zone};
