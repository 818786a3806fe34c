//! Uncompressed wire format, the baseline the block coder is measured against.
//!
//! One Alice message, bits written MSB-first:
//!
//! ```text
//! k      varint: 7-bit groups, least significant group first. Each group is
//!        one byte-sized unit [c d6 d5 d4 d3 d2 d1 d0] where c = 1 means
//!        another group follows.
//! label  2 bits: 00 = lambda, 01 = mu, 10 = nu (11 is invalid)
//! sign   1 bit:  0 = +1, 1 = -1 (omitted in the singlet variant)
//! ```
//!
//! A POVM reply is a single bit: 0 = outcome chosen, 1 = retry.

use thiserror::Error;

use crate::bits::{BitReader, BitWriter};

use super::{AliceMessage, Label, Sign};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("unexpected end of input")]
    Truncated,
    #[error("invalid label code {0:#04b}")]
    BadLabel(u8),
    #[error("record index must be at least 1")]
    ZeroIndex,
    #[error("varint longer than 64 bits")]
    Overlong,
}

pub fn write_varint(w: &mut BitWriter, mut v: u64) {
    loop {
        let group = v & 0x7F;
        v >>= 7;
        w.push(v != 0);
        w.push_bits(group, 7);
        if v == 0 {
            break;
        }
    }
}

pub fn read_varint(r: &mut BitReader<'_>) -> Result<u64, WireError> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let more = r.read().ok_or(WireError::Truncated)?;
        let group = r.read_bits(7).ok_or(WireError::Truncated)?;
        if shift == 63 && group > 1 {
            return Err(WireError::Overlong);
        }
        v |= group << shift;
        if !more {
            return Ok(v);
        }
    }
    Err(WireError::Overlong)
}

/// Writes `(k, label)` only.
pub fn write_index(w: &mut BitWriter, k: u64, label: Label) {
    write_varint(w, k);
    w.push_bits(label.index() as u64, 2);
}

pub fn read_index(r: &mut BitReader<'_>) -> Result<(u64, Label), WireError> {
    let k = read_varint(r)?;
    if k == 0 {
        return Err(WireError::ZeroIndex);
    }
    let code = r.read_bits(2).ok_or(WireError::Truncated)? as u8;
    let label = Label::from_index(code).ok_or(WireError::BadLabel(code))?;
    Ok((k, label))
}

pub fn write_message(w: &mut BitWriter, msg: &AliceMessage) {
    write_index(w, msg.k, msg.label);
    w.push(msg.sign == Sign::Minus);
}

pub fn read_message(r: &mut BitReader<'_>) -> Result<AliceMessage, WireError> {
    let (k, label) = read_index(r)?;
    let sign = if r.read().ok_or(WireError::Truncated)? {
        Sign::Minus
    } else {
        Sign::Plus
    };
    Ok(AliceMessage { k, label, sign })
}

pub fn write_reply(w: &mut BitWriter, retry: bool) {
    w.push(retry);
}

/// Size of a varint in bits.
pub fn varint_bits(k: u64) -> u64 {
    let groups = ((64 - k.leading_zeros()).max(1) as u64).div_ceil(7);
    8 * groups
}

/// Size of one full message in bits.
pub fn message_bits(msg: &AliceMessage) -> u64 {
    varint_bits(msg.k) + 3
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_message_layout() {
        let mut w = BitWriter::new();
        write_message(
            &mut w,
            &AliceMessage {
                k: 1,
                label: Label::Mu,
                sign: Sign::Minus,
            },
        );
        let (bytes, len) = w.finish();
        assert_eq!(len, 11);
        // 0 0000001 | 01 | 1
        assert_eq!(bytes, vec![0b0000_0001, 0b0110_0000]);
    }

    #[test]
    fn multi_group_varint() {
        let mut w = BitWriter::new();
        write_varint(&mut w, 300);
        let (bytes, len) = w.finish();
        assert_eq!(len, 16);
        // 300 = 0b10_0101100: low group 0101100 with continuation, then 0000010
        assert_eq!(bytes, vec![0b1010_1100, 0b0000_0010]);
        assert_eq!(varint_bits(300), 16);
        assert_eq!(varint_bits(127), 8);
        assert_eq!(varint_bits(128), 16);
    }

    #[test]
    fn decode_errors() {
        let mut w = BitWriter::new();
        write_varint(&mut w, 0);
        w.push_bits(0, 3);
        let (b, n) = w.finish();
        assert_eq!(
            read_message(&mut BitReader::new(&b, n)),
            Err(WireError::ZeroIndex)
        );

        let mut w = BitWriter::new();
        write_varint(&mut w, 5);
        w.push_bits(0b11, 2);
        w.push(false);
        let (b, n) = w.finish();
        assert_eq!(
            read_message(&mut BitReader::new(&b, n)),
            Err(WireError::BadLabel(3))
        );

        assert_eq!(
            read_message(&mut BitReader::new(&b, 5)),
            Err(WireError::Truncated)
        );
    }

    proptest! {
        #[test]
        fn message_roundtrip(k in 1u64.., l in 0u8..3, neg: bool) {
            let msg = AliceMessage {
                k,
                label: Label::from_index(l).unwrap(),
                sign: if neg { Sign::Minus } else { Sign::Plus },
            };
            let mut w = BitWriter::new();
            write_message(&mut w, &msg);
            prop_assert_eq!(w.len(), message_bits(&msg));
            let (b, n) = w.finish();
            let mut r = BitReader::new(&b, n);
            prop_assert_eq!(read_message(&mut r).unwrap(), msg);
            prop_assert_eq!(r.remaining(), 0);
        }
    }
}
