use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::token::grid::full_bits_for;

/// Bit precisions for the two token classes.
///
/// `b_full = ⌈log2 N⌉` is fixed by the codebook; `b_delta` must lie in
/// `2 ..= b_full`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    codebook_size: u32,
    full_bits: u32,
    delta_bits: u32,
}

impl CodecConfig {
    pub fn new(codebook_size: u32, delta_bits: u32) -> Result<Self> {
        Self::with_full_bits(codebook_size, full_bits_for(codebook_size), delta_bits)
    }

    /// Like [`CodecConfig::new`] but also checks a caller-supplied `b_full`.
    pub fn with_full_bits(codebook_size: u32, full_bits: u32, delta_bits: u32) -> Result<Self> {
        let cfg = Self {
            codebook_size,
            full_bits,
            delta_bits,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = full_bits_for(self.codebook_size);
        if self.full_bits != expected {
            return Err(Error::InvalidParameter(format!(
                "b_full must be ceil(log2 {}) = {expected}, got {}",
                self.codebook_size, self.full_bits
            )));
        }
        if self.delta_bits < 2 || self.delta_bits > self.full_bits {
            return Err(Error::InvalidParameter(format!(
                "b_delta must lie in [2, {}], got {}",
                self.full_bits, self.delta_bits
            )));
        }
        Ok(())
    }

    pub fn codebook_size(&self) -> u32 {
        self.codebook_size
    }

    pub fn full_bits(&self) -> u32 {
        self.full_bits
    }

    pub fn delta_bits(&self) -> u32 {
        self.delta_bits
    }

    /// `Q = 2^(b_delta − 1) − 1`.
    pub fn clip_bound(&self) -> u32 {
        (1u32 << (self.delta_bits - 1)) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants() {
        let cfg = CodecConfig::new(64000, 11).unwrap();
        assert_eq!(cfg.full_bits(), 16);
        assert_eq!(cfg.clip_bound(), 1023);
        assert_eq!(CodecConfig::new(64000, 2).unwrap().clip_bound(), 1);
        assert!(CodecConfig::new(64000, 1).is_err());
        assert!(CodecConfig::new(64000, 17).is_err());
        assert!(CodecConfig::with_full_bits(64000, 17, 11).is_err());
        assert!(CodecConfig::with_full_bits(64000, 16, 16).is_ok());
        // N=2 gives b_full=1, so no b_delta is valid
        assert!(CodecConfig::new(2, 2).is_err());
    }
}
