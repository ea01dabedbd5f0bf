use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TokenDims;
use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::wire::{put_f32, put_u16, put_u32, FieldReader};

const PIXEL_MAGIC: &[u8; 4] = b"TCPM";
const TOKEN_MAGIC: &[u8; 4] = b"TCTM";
const MASK_VERSION: u16 = 1;

/// Semantic class of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenClass {
    /// User-intended: carried at full precision.
    #[serde(rename = "s")]
    Intended,
    /// Non-intended: carried as a clipped differential.
    #[serde(rename = "n")]
    NonIntended,
}

impl TokenClass {
    pub const ALL: [TokenClass; 2] = [TokenClass::Intended, TokenClass::NonIntended];

    pub fn label(self) -> &'static str {
        match self {
            TokenClass::Intended => "s",
            TokenClass::NonIntended => "n",
        }
    }
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Writes `planes` consecutive planes of `plane_len` bits, each padded to a
/// byte boundary.
fn pack_planes(bits: &[bool], plane_len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(bits.len() / 8 + bits.len() / plane_len.max(1) + 1);
    for plane in bits.chunks(plane_len.max(1)) {
        let mut w = BitWriter::with_capacity_bits(plane.len() as u64);
        for &b in plane {
            w.write_bit(b);
        }
        out.extend(w.finish());
    }
    out
}

fn unpack_planes(
    r: &mut FieldReader<'_>,
    planes: usize,
    plane_len: usize,
) -> Result<Vec<bool>> {
    let plane_bytes = plane_len.div_ceil(8);
    let mut bits = Vec::with_capacity(planes * plane_len);
    for _ in 0..planes {
        let raw = r.take(plane_bytes)?;
        let mut br = BitReader::new(raw);
        for _ in 0..plane_len {
            bits.push(br.read_bit().expect("plane sized to fit"));
        }
    }
    Ok(bits)
}

/// Binary pixel masks for `T` frames of `H × W` pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMaskSequence {
    frames: u32,
    height: u32,
    width: u32,
    bits: Vec<bool>,
}

impl PixelMaskSequence {
    pub fn new(frames: u32, height: u32, width: u32, bits: Vec<bool>) -> Result<Self> {
        if frames == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "pixel mask dimensions must be positive, got {frames}x{height}x{width}"
            )));
        }
        let expected = frames as usize * height as usize * width as usize;
        if bits.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} mask pixels, got {}",
                bits.len()
            )));
        }
        Ok(Self {
            frames,
            height,
            width,
            bits,
        })
    }

    pub fn filled(frames: u32, height: u32, width: u32, value: bool) -> Result<Self> {
        let n = frames as usize * height as usize * width as usize;
        Self::new(frames, height, width, vec![value; n])
    }

    pub fn frames(&self) -> u32 {
        self.frames
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn frame(&self, k: u32) -> &[bool] {
        let n = self.frame_len();
        &self.bits[k as usize * n..(k as usize + 1) * n]
    }

    pub fn get(&self, k: u32, y: u32, x: u32) -> bool {
        self.bits[k as usize * self.frame_len() + y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, k: u32, y: u32, x: u32, value: bool) {
        let idx = k as usize * self.frame_len() + y as usize * self.width as usize + x as usize;
        self.bits[idx] = value;
    }

    fn frame_len(&self) -> usize {
        self.height as usize * self.width as usize
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(PIXEL_MAGIC);
        put_u16(&mut out, MASK_VERSION);
        put_u32(&mut out, self.frames);
        put_u32(&mut out, self.height);
        put_u32(&mut out, self.width);
        out.extend(pack_planes(&self.bits, self.frame_len()));
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = FieldReader::new(data, "pixel mask sequence");
        r.magic(PIXEL_MAGIC)?;
        r.version(MASK_VERSION)?;
        let (frames, height, width) = (r.u32()?, r.u32()?, r.u32()?);
        if frames == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidParameter(format!(
                "pixel mask dimensions must be positive, got {frames}x{height}x{width}"
            )));
        }
        let bits = unpack_planes(&mut r, frames as usize, height as usize * width as usize)?;
        r.finish()?;
        Self::new(frames, height, width, bits)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}

/// Token-level binary mask: `true` marks a user-intended token.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticTokenMask {
    dims: TokenDims,
    theta: f64,
    bits: Vec<bool>,
}

impl SemanticTokenMask {
    pub fn new(dims: TokenDims, theta: f64, bits: Vec<bool>) -> Result<Self> {
        check_theta(theta)?;
        if bits.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} mask tokens, got {}",
                dims.len(),
                bits.len()
            )));
        }
        Ok(Self { dims, theta, bits })
    }

    pub fn filled(dims: TokenDims, theta: f64, value: bool) -> Result<Self> {
        Self::new(dims, theta, vec![value; dims.len()])
    }

    pub fn dims(&self) -> TokenDims {
        self.dims
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_intended(&self, tau: u32, i: u32, j: u32) -> bool {
        self.bits[self.dims.flat(tau, i, j)]
    }

    pub fn class_at(&self, flat: usize) -> TokenClass {
        if self.bits[flat] {
            TokenClass::Intended
        } else {
            TokenClass::NonIntended
        }
    }

    /// `N_s`, counted over every temporal slice including the reference.
    pub fn intended_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn non_intended_count(&self) -> usize {
        self.bits.len() - self.intended_count()
    }

    /// A copy whose reference slice (`τ = 0`) is marked fully intended.
    ///
    /// This is the class assignment the encoder effectively applies, since
    /// the reference slice is always sent at full precision.
    pub fn with_reference_intended(&self) -> Self {
        let mut bits = self.bits.clone();
        bits[..self.dims.slice_len()].fill(true);
        Self {
            dims: self.dims,
            theta: self.theta,
            bits,
        }
    }

    /// SHA-256 over `t, h, w` (u32 LE) followed by the packed mask planes.
    ///
    /// The threshold is not part of the digest: two masks with the same bits
    /// decode a bitstream identically.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.dims.t.to_le_bytes());
        hasher.update(self.dims.h.to_le_bytes());
        hasher.update(self.dims.w.to_le_bytes());
        hasher.update(pack_planes(&self.bits, self.dims.slice_len()));
        hasher.finalize().into()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(TOKEN_MAGIC);
        put_u16(&mut out, MASK_VERSION);
        put_u32(&mut out, self.dims.t);
        put_u32(&mut out, self.dims.h);
        put_u32(&mut out, self.dims.w);
        put_f32(&mut out, self.theta as f32);
        out.extend(pack_planes(&self.bits, self.dims.slice_len()));
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = FieldReader::new(data, "token mask");
        r.magic(TOKEN_MAGIC)?;
        r.version(MASK_VERSION)?;
        let dims = TokenDims::new(r.u32()?, r.u32()?, r.u32()?)?;
        let theta = f64::from(r.f32()?);
        check_theta(theta)?;
        let bits = unpack_planes(&mut r, dims.t as usize, dims.slice_len())?;
        r.finish()?;
        Self::new(dims, theta, bits)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    Ok(())
}
