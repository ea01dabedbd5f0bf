use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wire::{put_u16, put_u32, FieldReader};

const GRID_MAGIC: &[u8; 4] = b"TCTG";
const GRID_VERSION: u16 = 1;

/// Shape of a token grid: `t` temporal slices of `h × w` tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenDims {
    pub t: u32,
    pub h: u32,
    pub w: u32,
}

impl TokenDims {
    pub fn new(t: u32, h: u32, w: u32) -> Result<Self> {
        if t == 0 || h == 0 || w == 0 {
            return Err(Error::InvalidParameter(format!(
                "token dimensions must be positive, got {t}x{h}x{w}"
            )));
        }
        Ok(Self { t, h, w })
    }

    pub fn len(&self) -> usize {
        self.t as usize * self.slice_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slice_len(&self) -> usize {
        self.h as usize * self.w as usize
    }

    #[inline]
    pub fn flat(&self, tau: u32, i: u32, j: u32) -> usize {
        (tau as usize * self.h as usize + i as usize) * self.w as usize + j as usize
    }

    #[inline]
    pub fn unflat(&self, flat: usize) -> (u32, u32, u32) {
        let w = self.w as usize;
        let hw = self.slice_len();
        ((flat / hw) as u32, ((flat % hw) / w) as u32, (flat % w) as u32)
    }
}

/// Tokenizer geometry: codebook size plus source video and stride sizes.
///
/// The token grid shape is derived as `t = T / d_t`, `h = H / d_s`,
/// `w = W / d_s`; each ratio must be exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub codebook_size: u32,
    pub frames: u32,
    pub height: u32,
    pub width: u32,
    pub temporal_stride: u16,
    pub spatial_stride: u16,
}

impl GridGeometry {
    pub fn new(
        codebook_size: u32,
        frames: u32,
        height: u32,
        width: u32,
        temporal_stride: u16,
        spatial_stride: u16,
    ) -> Result<Self> {
        let geom = Self {
            codebook_size,
            frames,
            height,
            width,
            temporal_stride,
            spatial_stride,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.codebook_size == 0 {
            return Err(Error::InvalidParameter("codebook size must be positive".into()));
        }
        if self.frames == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::InvalidParameter(format!(
                "source dimensions must be positive, got {}x{}x{}",
                self.frames, self.height, self.width
            )));
        }
        if self.temporal_stride == 0 || self.spatial_stride == 0 {
            return Err(Error::InvalidParameter("downsampling factors must be positive".into()));
        }
        let dt = u32::from(self.temporal_stride);
        let ds = u32::from(self.spatial_stride);
        if !self.frames.is_multiple_of(dt) {
            return Err(Error::DimensionMismatch(format!(
                "T={} is not divisible by d_t={dt}",
                self.frames
            )));
        }
        if !self.height.is_multiple_of(ds) || !self.width.is_multiple_of(ds) {
            return Err(Error::DimensionMismatch(format!(
                "H={} or W={} is not divisible by d_s={ds}",
                self.height, self.width
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> TokenDims {
        let dt = u32::from(self.temporal_stride);
        let ds = u32::from(self.spatial_stride);
        TokenDims {
            t: self.frames / dt,
            h: self.height / ds,
            w: self.width / ds,
        }
    }

    /// `⌈log2 N⌉`, the bits needed for a raw codebook index.
    pub fn full_bits(&self) -> u32 {
        full_bits_for(self.codebook_size)
    }
}

pub(crate) fn full_bits_for(codebook_size: u32) -> u32 {
    if codebook_size <= 1 {
        0
    } else {
        32 - (codebook_size - 1).leading_zeros()
    }
}

/// A `t × h × w` grid of codebook indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenGrid {
    geometry: GridGeometry,
    indices: Vec<u32>,
}

impl TokenGrid {
    pub fn new(geometry: GridGeometry, indices: Vec<u32>) -> Result<Self> {
        geometry.validate()?;
        let dims = geometry.dims();
        if indices.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} indices for a {}x{}x{} grid, got {}",
                dims.len(),
                dims.t,
                dims.h,
                dims.w,
                indices.len()
            )));
        }
        if let Some((position, &index)) = indices
            .iter()
            .enumerate()
            .find(|(_, &v)| v >= geometry.codebook_size)
        {
            return Err(Error::IndexOutOfRange {
                index,
                codebook_size: geometry.codebook_size,
                position,
            });
        }
        Ok(Self { geometry, indices })
    }

    pub fn zeros(geometry: GridGeometry) -> Result<Self> {
        geometry.validate()?;
        let n = geometry.dims().len();
        Ok(Self {
            geometry,
            indices: vec![0; n],
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> TokenDims {
        self.geometry.dims()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn get(&self, tau: u32, i: u32, j: u32) -> u32 {
        self.indices[self.dims().flat(tau, i, j)]
    }

    /// The `h × w` slice at temporal index `tau`.
    pub fn slice(&self, tau: u32) -> &[u32] {
        let n = self.dims().slice_len();
        let start = tau as usize * n;
        &self.indices[start..start + n]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = &self.geometry;
        let mut out = Vec::with_capacity(26 + 4 * self.indices.len());
        out.extend_from_slice(GRID_MAGIC);
        put_u16(&mut out, GRID_VERSION);
        put_u32(&mut out, g.codebook_size);
        put_u32(&mut out, g.frames);
        put_u32(&mut out, g.height);
        put_u32(&mut out, g.width);
        put_u16(&mut out, g.temporal_stride);
        put_u16(&mut out, g.spatial_stride);
        for &v in &self.indices {
            put_u32(&mut out, v);
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = FieldReader::new(data, "token grid");
        r.magic(GRID_MAGIC)?;
        r.version(GRID_VERSION)?;
        let geometry = GridGeometry {
            codebook_size: r.u32()?,
            frames: r.u32()?,
            height: r.u32()?,
            width: r.u32()?,
            temporal_stride: r.u16()?,
            spatial_stride: r.u16()?,
        };
        geometry.validate()?;
        let n = geometry.dims().len();
        let mut indices = Vec::with_capacity(n);
        for _ in 0..n {
            indices.push(r.u32()?);
        }
        r.finish()?;
        Self::new(geometry, indices)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }
}
