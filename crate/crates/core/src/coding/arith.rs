//! Binary arithmetic coder with 32-bit registers (low/high with pending
//! bits for the underflow case).

use crate::bits::{BitReader, BitWriter};

const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;
const THREE_QUARTERS: u64 = 3 << 30;
const TOP: u64 = (1 << 32) - 1;

/// Largest frequency total the coder accepts. After renormalization the
/// range is above a quarter of 2^32, so every symbol of frequency ≥ 1 keeps a
/// nonempty interval.
pub const MAX_TOTAL: u32 = 1 << 16;

#[derive(Debug)]
pub struct Encoder {
    low: u64,
    high: u64,
    pending: u64,
    out: BitWriter,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Encoder {
            low: 0,
            high: TOP,
            pending: 0,
            out: BitWriter::new(),
        }
    }

    fn emit(&mut self, bit: bool) {
        self.out.push(bit);
        for _ in 0..self.pending {
            self.out.push(!bit);
        }
        self.pending = 0;
    }

    /// Narrows the interval to `[cum_lo, cum_hi) / total`.
    pub fn encode(&mut self, cum_lo: u32, cum_hi: u32, total: u32) {
        debug_assert!(cum_lo < cum_hi && cum_hi <= total && total <= MAX_TOTAL);
        let range = self.high - self.low + 1;
        self.high = self.low + range * cum_hi as u64 / total as u64 - 1;
        self.low += range * cum_lo as u64 / total as u64;
        loop {
            if self.high < HALF {
                self.emit(false);
            } else if self.low >= HALF {
                self.emit(true);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
    }

    /// Flushes two disambiguating bits (plus pending) and returns the payload.
    pub fn finish(mut self) -> (Vec<u8>, u64) {
        self.pending += 1;
        let bit = self.low >= QUARTER;
        self.emit(bit);
        self.out.finish()
    }
}

#[derive(Debug)]
pub struct Decoder<'a> {
    low: u64,
    high: u64,
    value: u64,
    reader: BitReader<'a>,
    shifts: u64,
}

impl<'a> Decoder<'a> {
    pub fn new(payload: &'a [u8], bits: u64) -> Self {
        let mut reader = BitReader::new(payload, bits);
        let mut value = 0;
        for _ in 0..32 {
            value = (value << 1) | reader.read_or_zero() as u64;
        }
        Decoder {
            low: 0,
            high: TOP,
            value,
            reader,
            shifts: 0,
        }
    }

    /// Scaled position of the code value inside the current interval; the
    /// symbol whose cumulative range contains it is the next symbol.
    pub fn target(&self, total: u32) -> u32 {
        let range = self.high - self.low + 1;
        (((self.value - self.low + 1) * total as u64 - 1) / range) as u32
    }

    /// Applies the same narrowing as [`Encoder::encode`].
    pub fn consume(&mut self, cum_lo: u32, cum_hi: u32, total: u32) {
        let range = self.high - self.low + 1;
        self.high = self.low + range * cum_hi as u64 / total as u64 - 1;
        self.low += range * cum_lo as u64 / total as u64;
        loop {
            if self.high < HALF {
            } else if self.low >= HALF {
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.reader.read_or_zero() as u64;
            self.shifts += 1;
        }
    }

    /// Payload length the encoder must have produced for the symbols decoded
    /// so far: one bit or pending bit per renormalization, plus two at flush.
    pub fn implied_length(&self) -> u64 {
        self.shifts + 2
    }

    /// Bits read so far, including zero padding past the payload.
    pub fn bits_read(&self) -> u64 {
        self.reader.position()
    }
}
