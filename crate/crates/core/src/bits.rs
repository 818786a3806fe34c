//! MSB-first bit packing shared by the wire format and the block coder.

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        let pos = (self.len % 8) as u8;
        if pos == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> pos;
        }
        self.len += 1;
    }

    /// Writes the low `n` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, n: u32) {
        for i in (0..n).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bytes with the final byte zero-padded, and the bit length.
    pub fn finish(self) -> (Vec<u8>, u64) {
        (self.bytes, self.len)
    }
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], len: u64) -> Self {
        debug_assert!(len <= bytes.len() as u64 * 8);
        BitReader { bytes, len, pos: 0 }
    }

    /// Next bit, or `None` past the end.
    pub fn read(&mut self) -> Option<bool> {
        if self.pos >= self.len {
            return None;
        }
        let byte = self.bytes[(self.pos / 8) as usize];
        let bit = byte & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Some(bit)
    }

    /// Next bit, reading zeros past the end. Position still advances.
    pub fn read_or_zero(&mut self) -> bool {
        match self.read() {
            Some(b) => b,
            None => {
                self.pos += 1;
                false
            }
        }
    }

    pub fn read_bits(&mut self, n: u32) -> Option<u64> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.read()? as u64;
        }
        Some(v)
    }

    /// Bits consumed so far, counting zeros read past the end.
    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        self.len.saturating_sub(self.pos)
    }
}
