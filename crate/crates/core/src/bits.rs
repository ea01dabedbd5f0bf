//! MSB-first bit packing shared by every binary format in the crate.
//!
//! Values are written most-significant bit first and concatenated without
//! alignment. [`BitWriter::finish`] pads the tail with zero bits up to the
//! next byte boundary.

/// Accumulates fixed-width unsigned values into a byte buffer.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    buf: Vec<u8>,
    acc: u64,
    pending: u32,
    bits_written: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity_bits(bits: u64) -> Self {
        Self {
            buf: Vec::with_capacity(bits.div_ceil(8) as usize),
            ..Self::default()
        }
    }

    /// Appends the low `width` bits of `value`, MSB first.
    ///
    /// `width` must be at most 32 and `value` must fit in it.
    #[inline]
    pub fn write(&mut self, value: u32, width: u32) {
        debug_assert!(width <= 32);
        debug_assert!(width == 32 || u64::from(value) < (1u64 << width));
        if width == 0 {
            return;
        }
        self.acc = (self.acc << width) | u64::from(value);
        self.pending += width;
        self.bits_written += u64::from(width);
        while self.pending >= 8 {
            self.pending -= 8;
            self.buf.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u64 << self.pending) - 1;
    }

    #[inline]
    pub fn write_bit(&mut self, bit: bool) {
        self.write(u32::from(bit), 1);
    }

    /// Number of value bits written so far (padding excluded).
    pub fn bits_written(&self) -> u64 {
        self.bits_written
    }

    /// Flushes any partial byte, zero-padded on the right.
    pub fn finish(mut self) -> Vec<u8> {
        if self.pending > 0 {
            self.buf.push((self.acc << (8 - self.pending)) as u8);
        }
        self.buf
    }
}

/// Reads fixed-width unsigned values from a byte slice, MSB first.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn remaining(&self) -> u64 {
        (self.data.len() as u64 * 8).saturating_sub(self.pos)
    }

    /// Reads `width` bits, or `None` if the slice is exhausted.
    #[inline]
    pub fn read(&mut self, width: u32) -> Option<u32> {
        debug_assert!(width <= 32);
        if u64::from(width) > self.remaining() {
            return None;
        }
        let mut out = 0u64;
        let mut left = width;
        while left > 0 {
            let byte = self.data[(self.pos / 8) as usize];
            let offset = (self.pos % 8) as u32;
            let avail = 8 - offset;
            let take = avail.min(left);
            let chunk = (byte >> (avail - take)) & ((1u16 << take) - 1) as u8;
            out = (out << take) | u64::from(chunk);
            left -= take;
            self.pos += u64::from(take);
        }
        Some(out as u32)
    }

    #[inline]
    pub fn read_bit(&mut self) -> Option<bool> {
        self.read(1).map(|b| b == 1)
    }
}

/// Number of bytes needed to hold `bits` bits.
pub fn bytes_for_bits(bits: u64) -> u64 {
    bits.div_ceil(8)
}
