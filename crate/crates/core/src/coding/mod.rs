//! Block coding of Alice's messages against Bob's copy of the `u` stream.
//!
//! Each session contributes the zone symbols of the records Alice scanned,
//! `R … R A_l`, coded with an arithmetic coder whose model at record `k`
//! depends only on `u_k`. Bob rebuilds the same model from his own stream,
//! so nothing but the payload and the raw sign bits is sent.
//!
//! Serialized block (all integers little-endian):
//!
//! ```text
//! offset  size            field
//! 0       4               magic "LHVT"
//! 4       1               format version (1)
//! 5       8               n_sessions
//! 13      8               payload length in bits
//! 21      ceil(bits/8)    payload, MSB-first, last byte zero-padded
//! ..      ceil(n/8)       sign bits, one per session, MSB-first, 1 = minus
//! ```
//!
//! After the zone symbols the payload carries a 32-bit check word derived
//! from the session seeds. A decoder using different seeds almost always
//! reads a different check word, runs past the payload, or ends at a length
//! other than the one recorded in the header.

pub mod arith;
pub mod model;

use thiserror::Error;

use crate::bits::BitWriter;
use crate::lhv::{record_at, session_seed, SessionStreams};
use crate::protocol::{zone_of, AliceMessage, BlochState, Sign, Zone, DEFAULT_ITERATION_CAP};

use arith::{Decoder, Encoder};
pub use model::{symbol_index, SymbolModel, FREQ_BITS, FREQ_TOTAL, SYMBOLS};

pub const MAGIC: &[u8; 4] = b"LHVT";
pub const FORMAT_VERSION: u8 = 1;
const HEADER_LEN: usize = 21;
/// Extra bits past the recorded length a decoder may read before giving up.
/// A valid payload never needs more than 30.
const OVERRUN_SLACK: u64 = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodingError {
    #[error("session {session}: {reason}")]
    Inconsistent { session: u64, reason: String },
    #[error("integrity check failed: {0}")]
    Integrity(String),
    #[error("block truncated")]
    Truncated,
    #[error("malformed block: {0}")]
    Format(String),
}

impl CodingError {
    pub fn is_integrity(&self) -> bool {
        matches!(self, CodingError::Integrity(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedBlock {
    pub n_sessions: u64,
    pub payload: Vec<u8>,
    pub payload_bits: u64,
    pub sign_bits: Vec<u8>,
}

impl CodedBlock {
    /// Payload plus one sign bit per session.
    pub fn total_bits(&self) -> u64 {
        self.payload_bits + self.n_sessions
    }

    pub fn payload_bits_per_session(&self) -> f64 {
        self.payload_bits as f64 / self.n_sessions as f64
    }

    pub fn sign(&self, i: u64) -> Sign {
        let byte = self.sign_bits[(i / 8) as usize];
        if byte >> (7 - i % 8) & 1 == 1 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len() + self.sign_bits.len());
        out.extend_from_slice(MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&self.n_sessions.to_le_bytes());
        out.extend_from_slice(&self.payload_bits.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.sign_bits);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CodingError> {
        if bytes.len() < 5 {
            return Err(CodingError::Truncated);
        }
        if &bytes[..4] != MAGIC {
            return Err(CodingError::Format("bad magic".into()));
        }
        if bytes[4] != FORMAT_VERSION {
            return Err(CodingError::Format(format!(
                "unsupported version {}",
                bytes[4]
            )));
        }
        if bytes.len() < HEADER_LEN {
            return Err(CodingError::Truncated);
        }
        let n_sessions = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
        let payload_bits = u64::from_le_bytes(bytes[13..21].try_into().unwrap());
        let payload_len = payload_bits.div_ceil(8);
        let sign_len = n_sessions.div_ceil(8);
        let need = payload_len
            .checked_add(sign_len)
            .and_then(|n| n.checked_add(HEADER_LEN as u64))
            .ok_or_else(|| CodingError::Format("length overflow".into()))?;
        let have = bytes.len() as u64;
        if have < need {
            return Err(CodingError::Truncated);
        }
        if have > need {
            return Err(CodingError::Format(format!(
                "{} trailing bytes",
                have - need
            )));
        }
        let split = HEADER_LEN + payload_len as usize;
        Ok(CodedBlock {
            n_sessions,
            payload: bytes[HEADER_LEN..split].to_vec(),
            payload_bits,
            sign_bits: bytes[split..].to_vec(),
        })
    }
}

fn check_word(streams: &SessionStreams, n: u64) -> u32 {
    (session_seed(streams.seed(u64::MAX), n) >> 32) as u32
}

fn pack_signs(messages: &[AliceMessage]) -> Vec<u8> {
    let mut w = BitWriter::new();
    for m in messages {
        w.push(m.sign == Sign::Minus);
    }
    w.finish().0
}

/// Codes message `i` of a block; message `i` belongs to session `i` of
/// `streams`. Only the record index is checked here (`k ≥ 1`); use
/// [`encode_block_checked`] when the states are at hand.
pub fn encode_block(
    messages: &[AliceMessage],
    streams: &SessionStreams,
) -> Result<CodedBlock, CodingError> {
    let mut enc = Encoder::new();
    for (i, msg) in messages.iter().enumerate() {
        if msg.k == 0 || msg.k > DEFAULT_ITERATION_CAP {
            return Err(CodingError::Inconsistent {
                session: i as u64,
                reason: format!("record index {} out of range", msg.k),
            });
        }
        let seed = streams.seed(i as u64);
        for k in 1..=msg.k {
            let m = SymbolModel::for_u(record_at(seed, k).u);
            let s = if k < msg.k {
                0
            } else {
                symbol_index(msg.label.zone())
            };
            let (lo, hi) = m.range(s);
            enc.encode(lo, hi, FREQ_TOTAL);
        }
    }
    let check = check_word(streams, messages.len() as u64);
    for half in [check >> 16, check & 0xFFFF] {
        enc.encode(half, half + 1, FREQ_TOTAL);
    }
    let (payload, payload_bits) = enc.finish();
    Ok(CodedBlock {
        n_sessions: messages.len() as u64,
        payload,
        payload_bits,
        sign_bits: pack_signs(messages),
    })
}

/// Like [`encode_block`], but first replays Alice's zone test for every
/// record of every session and rejects messages she could not have sent.
pub fn encode_block_checked(
    states: &[BlochState],
    messages: &[AliceMessage],
    streams: &SessionStreams,
) -> Result<CodedBlock, CodingError> {
    if states.len() != messages.len() {
        return Err(CodingError::Format(format!(
            "{} states for {} messages",
            states.len(),
            messages.len()
        )));
    }
    for (i, (a, msg)) in states.iter().zip(messages).enumerate() {
        let session = i as u64;
        let fail = |reason: String| CodingError::Inconsistent { session, reason };
        if msg.k == 0 || msg.k > DEFAULT_ITERATION_CAP {
            return Err(fail(format!("record index {} out of range", msg.k)));
        }
        let seed = streams.seed(session);
        for k in 1..msg.k {
            let z = zone_of(a, &record_at(seed, k));
            if z != Zone::Reject {
                return Err(fail(format!(
                    "record {k} is in zone {} before k={}",
                    z.name(),
                    msg.k
                )));
            }
        }
        let rec = record_at(seed, msg.k);
        let z = zone_of(a, &rec);
        if z != msg.label.zone() {
            return Err(fail(format!(
                "record {} is in zone {}, message says {}",
                msg.k,
                z.name(),
                msg.label.zone().name()
            )));
        }
        if Sign::of(a.vector().dot(msg.label.pick(&rec.triplet))) != msg.sign {
            return Err(fail("sign bit does not match".into()));
        }
    }
    encode_block(messages, streams)
}

pub fn decode_block(
    block: &CodedBlock,
    streams: &SessionStreams,
) -> Result<Vec<AliceMessage>, CodingError> {
    if block.sign_bits.len() as u64 != block.n_sessions.div_ceil(8)
        || block.payload.len() as u64 != block.payload_bits.div_ceil(8)
    {
        return Err(CodingError::Truncated);
    }
    let limit = block.payload_bits + OVERRUN_SLACK;
    let overrun = || CodingError::Integrity("decoder ran past the end of the payload".into());
    let mut dec = Decoder::new(&block.payload, block.payload_bits);
    let mut out = Vec::with_capacity(block.n_sessions.min(1 << 24) as usize);
    for i in 0..block.n_sessions {
        let seed = streams.seed(i);
        let mut k = 1;
        let label = loop {
            let m = SymbolModel::for_u(record_at(seed, k).u);
            let s = m.find(dec.target(FREQ_TOTAL));
            let (lo, hi) = m.range(s);
            dec.consume(lo, hi, FREQ_TOTAL);
            if dec.bits_read() > limit {
                return Err(overrun());
            }
            if let Some(l) = SYMBOLS[s].label() {
                break l;
            }
            k += 1;
            if k > DEFAULT_ITERATION_CAP {
                return Err(CodingError::Integrity(format!("session {i} never accepts")));
            }
        };
        out.push(AliceMessage {
            k,
            label,
            sign: block.sign(i),
        });
    }
    let mut check = 0u32;
    for _ in 0..2 {
        let half = dec.target(FREQ_TOTAL);
        dec.consume(half, half + 1, FREQ_TOTAL);
        check = (check << 16) | half;
    }
    if dec.bits_read() > limit {
        return Err(overrun());
    }
    if check != check_word(streams, block.n_sessions) {
        return Err(CodingError::Integrity("check word mismatch".into()));
    }
    if dec.implied_length() != block.payload_bits {
        return Err(CodingError::Integrity(format!(
            "payload holds {} bits, decoded symbols account for {}",
            block.payload_bits,
            dec.implied_length()
        )));
    }
    Ok(out)
}

/// Bits the same messages take in the uncoded wire format.
pub fn naive_bits(messages: &[AliceMessage]) -> u64 {
    messages
        .iter()
        .map(crate::protocol::wire::message_bits)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{UnitVec3, Vec3};
    use crate::protocol::alice_select;

    fn sessions(master: u64, n: u64) -> (Vec<BlochState>, Vec<AliceMessage>) {
        let streams = SessionStreams::new(master);
        let a = BlochState::new(UnitVec3::normalize(Vec3::new(0.3, -0.5, 0.8)).unwrap());
        let msgs = (0..n)
            .map(|i| alice_select(&a, &mut streams.stream(i)).unwrap().message)
            .collect();
        (vec![a; n as usize], msgs)
    }

    #[test]
    fn roundtrip_and_bytes() {
        let streams = SessionStreams::new(11);
        let (states, msgs) = sessions(11, 500);
        let block = encode_block_checked(&states, &msgs, &streams).unwrap();
        assert_eq!(block, encode_block(&msgs, &streams).unwrap());
        let parsed = CodedBlock::from_bytes(&block.to_bytes()).unwrap();
        assert_eq!(parsed, block);
        assert_eq!(decode_block(&parsed, &streams).unwrap(), msgs);
    }

    #[test]
    fn empty_block() {
        let streams = SessionStreams::new(3);
        let block = encode_block(&[], &streams).unwrap();
        assert_eq!(block.n_sessions, 0);
        assert!(decode_block(&block, &streams).unwrap().is_empty());
        assert_eq!(block.to_bytes().len(), HEADER_LEN + block.payload.len());
    }

    #[test]
    fn wrong_seed_is_detected() {
        let (_, msgs) = sessions(5, 1000);
        let block = encode_block(&msgs, &SessionStreams::new(5)).unwrap();
        let err = decode_block(&block, &SessionStreams::new(6)).unwrap_err();
        assert!(err.is_integrity(), "{err}");
    }

    #[test]
    fn inconsistent_message_rejected() {
        let streams = SessionStreams::new(8);
        let (states, mut msgs) = sessions(8, 20);
        msgs[7].k += 1;
        let err = encode_block_checked(&states, &msgs, &streams).unwrap_err();
        assert!(
            matches!(err, CodingError::Inconsistent { session: 7, .. }),
            "{err}"
        );
        let (states, mut msgs) = sessions(8, 20);
        msgs[3].sign = msgs[3].sign.flip();
        assert!(encode_block_checked(&states, &msgs, &streams).is_err());
    }

    #[test]
    fn format_errors() {
        let streams = SessionStreams::new(1);
        let (_, msgs) = sessions(1, 30);
        let bytes = encode_block(&msgs, &streams).unwrap().to_bytes();
        assert_eq!(
            CodedBlock::from_bytes(&bytes[..bytes.len() - 1]),
            Err(CodingError::Truncated)
        );
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            CodedBlock::from_bytes(&extra),
            Err(CodingError::Format(_))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            CodedBlock::from_bytes(&bad),
            Err(CodingError::Format(_))
        ));
        let mut ver = bytes;
        ver[4] = 2;
        assert!(matches!(
            CodedBlock::from_bytes(&ver),
            Err(CodingError::Format(_))
        ));
    }

    #[test]
    fn shortened_payload_fails() {
        let streams = SessionStreams::new(4);
        let (_, msgs) = sessions(4, 200);
        let mut block = encode_block(&msgs, &streams).unwrap();
        block.payload_bits -= 40;
        block
            .payload
            .truncate(block.payload_bits.div_ceil(8) as usize);
        assert!(decode_block(&block, &streams).is_err());
    }
}
