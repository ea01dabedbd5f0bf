use std::fs;
use std::path::Path;

use super::CodecConfig;
use crate::bits::{bytes_for_bits, BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::token::GridGeometry;
use crate::wire::{put_u16, put_u32, put_u64, FieldReader};

const STREAM_MAGIC: &[u8; 4] = b"TCBS";
const STREAM_VERSION: u16 = 1;

/// An encoded token grid.
///
/// File layout (`.tcs`, little-endian):
///
/// ```text
/// "TCBS"  u16 version=1
/// u32 N   u8 b_full   u8 b_delta
/// u32 T   u32 H   u32 W   u16 d_t   u16 d_s
/// [u8; 32] SHA-256 mask digest
/// u64 payload_bits
/// reference slice: h·w values × b_full bits, MSB-first, zero-padded
/// payload: payload_bits bits, MSB-first, zero-padded
/// u32 CRC-32 over every preceding byte
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenBitstream {
    config: CodecConfig,
    geometry: GridGeometry,
    mask_digest: [u8; 32],
    reference: Vec<u32>,
    payload: Vec<u8>,
    payload_bits: u64,
}

impl TokenBitstream {
    pub fn new(
        config: CodecConfig,
        geometry: GridGeometry,
        mask_digest: [u8; 32],
        reference: Vec<u32>,
        payload: Vec<u8>,
        payload_bits: u64,
    ) -> Self {
        Self {
            config,
            geometry,
            mask_digest,
            reference,
            payload,
            payload_bits,
        }
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn mask_digest(&self) -> &[u8; 32] {
        &self.mask_digest
    }

    pub fn reference(&self) -> &[u32] {
        &self.reference
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    /// Bits in the `τ ≥ 1` payload, padding excluded.
    pub fn payload_bits(&self) -> u64 {
        self.payload_bits
    }

    /// Bits spent on the full-precision reference slice.
    pub fn reference_bits(&self) -> u64 {
        self.reference.len() as u64 * u64::from(self.config.full_bits())
    }

    /// Reference plus payload bits, headers and padding excluded.
    pub fn token_bits(&self) -> u64 {
        self.reference_bits() + self.payload_bits
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = &self.geometry;
        let mut out = Vec::with_capacity(
            80 + bytes_for_bits(self.reference_bits()) as usize + self.payload.len(),
        );
        out.extend_from_slice(STREAM_MAGIC);
        put_u16(&mut out, STREAM_VERSION);
        put_u32(&mut out, self.config.codebook_size());
        out.push(self.config.full_bits() as u8);
        out.push(self.config.delta_bits() as u8);
        put_u32(&mut out, g.frames);
        put_u32(&mut out, g.height);
        put_u32(&mut out, g.width);
        put_u16(&mut out, g.temporal_stride);
        put_u16(&mut out, g.spatial_stride);
        out.extend_from_slice(&self.mask_digest);
        put_u64(&mut out, self.payload_bits);
        let mut w = BitWriter::with_capacity_bits(self.reference_bits());
        for &z in &self.reference {
            w.write(z, self.config.full_bits());
        }
        out.extend(w.finish());
        let payload_len = bytes_for_bits(self.payload_bits) as usize;
        out.extend_from_slice(&self.payload[..payload_len.min(self.payload.len())]);
        out.resize(out.len() + payload_len.saturating_sub(self.payload.len()), 0);
        let crc = crc32fast::hash(&out);
        put_u32(&mut out, crc);
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = FieldReader::new(data, "token bitstream");
        r.magic(STREAM_MAGIC)?;
        r.version(STREAM_VERSION)?;
        let codebook_size = r.u32()?;
        let full_bits = u32::from(r.u8()?);
        let delta_bits = u32::from(r.u8()?);
        let geometry = GridGeometry {
            codebook_size,
            frames: r.u32()?,
            height: r.u32()?,
            width: r.u32()?,
            temporal_stride: r.u16()?,
            spatial_stride: r.u16()?,
        };
        geometry.validate()?;
        let config = CodecConfig::with_full_bits(codebook_size, full_bits, delta_bits)?;
        let mask_digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        let payload_bits = r.u64()?;

        let hw = geometry.dims().slice_len();
        let reference_bytes = r.take(bytes_for_bits(hw as u64 * u64::from(full_bits)) as usize)?;
        let payload = r.take(bytes_for_bits(payload_bits) as usize)?.to_vec();
        let body_len = r.position();
        let stored = r.u32()?;
        r.finish()?;
        let computed = crc32fast::hash(&data[..body_len]);
        if stored != computed {
            return Err(Error::ChecksumMismatch { stored, computed });
        }

        let mut br = BitReader::new(reference_bytes);
        let reference = (0..hw)
            .map(|_| br.read(full_bits).expect("sized above"))
            .collect();
        Ok(Self {
            config,
            geometry,
            mask_digest,
            reference,
            payload,
            payload_bits,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}
