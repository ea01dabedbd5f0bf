//! Closed-form rate accounting.

use super::CodecConfig;
use crate::error::{Error, Result};
use crate::token::{GridGeometry, SemanticTokenMask};

/// Token payload in bits: `N_s·b_full + N_n·b_delta` over every token of
/// the mask, equal to `t·h·w·(ρ_s·b_full + (1 − ρ_s)·b_delta)`.
pub fn payload_bits(mask: &SemanticTokenMask, cfg: &CodecConfig) -> u64 {
    let ns = mask.intended_count() as u64;
    let nn = mask.non_intended_count() as u64;
    ns * u64::from(cfg.full_bits()) + nn * u64::from(cfg.delta_bits())
}

/// Bits the encoder actually emits for tokens: the reference slice at full
/// precision plus the class-dependent payload for `τ ≥ 1`.
///
/// Equals [`payload_bits`] of the mask with its reference slice forced to
/// intended.
pub fn encoded_token_bits(mask: &SemanticTokenMask, cfg: &CodecConfig) -> u64 {
    let hw = mask.dims().slice_len();
    let full = u64::from(cfg.full_bits());
    let delta = u64::from(cfg.delta_bits());
    let coded: u64 = mask.bits()[hw..]
        .iter()
        .map(|&intended| if intended { full } else { delta })
        .sum();
    hw as u64 * full + coded
}

/// Bits per pixel: `(ρ_s·b_full + (1 − ρ_s)·b_delta) / (3·d_t·d_s²)`.
pub fn bpp(mask: &SemanticTokenMask, cfg: &CodecConfig, geometry: &GridGeometry) -> f64 {
    let per_token = payload_bits(mask, cfg) as f64 / mask.dims().len() as f64;
    per_token / pixels_per_token(geometry.temporal_stride, geometry.spatial_stride)
}

/// [`bpp`] for a given intended ratio rather than a concrete mask.
pub fn bpp_for_ratio(rho_s: f64, cfg: &CodecConfig, temporal_stride: u16, spatial_stride: u16) -> f64 {
    mean_token_bits(rho_s, cfg) / pixels_per_token(temporal_stride, spatial_stride)
}

fn pixels_per_token(dt: u16, ds: u16) -> f64 {
    3.0 * f64::from(dt) * f64::from(ds) * f64::from(ds)
}

fn mean_token_bits(rho_s: f64, cfg: &CodecConfig) -> f64 {
    rho_s * f64::from(cfg.full_bits()) + (1.0 - rho_s) * f64::from(cfg.delta_bits())
}

/// Mask side information relative to the token payload, for a first-slice
/// mask plus per-block motion vectors on the token grid:
///
/// `(1/t + ((t − 1)/t)·B_mv/g²) / (ρ_s·b_full + (1 − ρ_s)·b_delta)`
pub fn side_info_overhead(
    temporal_tokens: u32,
    block_size: u32,
    mv_bits: u32,
    rho_s: f64,
    cfg: &CodecConfig,
) -> Result<f64> {
    if temporal_tokens == 0 {
        return Err(Error::InvalidParameter("temporal token count must be positive".into()));
    }
    if block_size == 0 {
        return Err(Error::InvalidParameter("motion block size must be positive".into()));
    }
    if !(0.0..=1.0).contains(&rho_s) {
        return Err(Error::InvalidParameter(format!("rho_s must lie in [0, 1], got {rho_s}")));
    }
    let t = f64::from(temporal_tokens);
    let g2 = f64::from(block_size) * f64::from(block_size);
    let numerator = 1.0 / t + ((t - 1.0) / t) * f64::from(mv_bits) / g2;
    Ok(numerator / mean_token_bits(rho_s, cfg))
}
