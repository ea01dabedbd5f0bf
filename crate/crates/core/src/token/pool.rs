use super::mask::check_theta;
use super::{GridGeometry, PixelMaskSequence, SemanticTokenMask};
use crate::error::{Error, Result};

/// Pools pixel masks onto the token grid and thresholds the result.
///
/// Each token `(τ, i, j)` averages the `d_t` frames `τ·d_t .. τ·d_t + d_t`
/// over the pixel cell with rows `⌊i·H/h⌋ .. ⌊(i+1)·H/h⌋` (columns
/// likewise). A token is intended iff that average is strictly greater
/// than `theta`.
pub fn pool_pixel_masks(
    masks: &PixelMaskSequence,
    geometry: &GridGeometry,
    theta: f64,
) -> Result<SemanticTokenMask> {
    check_theta(theta)?;
    geometry.validate()?;
    if masks.frames() != geometry.frames
        || masks.height() != geometry.height
        || masks.width() != geometry.width
    {
        return Err(Error::DimensionMismatch(format!(
            "pixel masks are {}x{}x{} but the grid geometry expects {}x{}x{}",
            masks.frames(),
            masks.height(),
            masks.width(),
            geometry.frames,
            geometry.height,
            geometry.width
        )));
    }

    let dims = geometry.dims();
    let dt = u32::from(geometry.temporal_stride);
    let (big_h, big_w) = (u64::from(masks.height()), u64::from(masks.width()));
    let row_edges: Vec<u32> = (0..=dims.h)
        .map(|i| (u64::from(i) * big_h / u64::from(dims.h)) as u32)
        .collect();
    let col_edges: Vec<u32> = (0..=dims.w)
        .map(|j| (u64::from(j) * big_w / u64::from(dims.w)) as u32)
        .collect();

    let mut bits = Vec::with_capacity(dims.len());
    for tau in 0..dims.t {
        for i in 0..dims.h as usize {
            for j in 0..dims.w as usize {
                let (y0, y1) = (row_edges[i], row_edges[i + 1]);
                let (x0, x1) = (col_edges[j], col_edges[j + 1]);
                let area = u64::from(y1 - y0) * u64::from(x1 - x0);
                let mut hits = 0u64;
                for f in 0..dt {
                    let frame = masks.frame(tau * dt + f);
                    for y in y0..y1 {
                        let row = &frame[(y * masks.width()) as usize..][..masks.width() as usize];
                        hits += row[x0 as usize..x1 as usize].iter().filter(|&&b| b).count() as u64;
                    }
                }
                // Every cell has the same area in each of the d_t frames, so
                // the mean of per-frame averages is hits / (d_t · area).
                let mean = hits as f64 / (u64::from(dt) * area) as f64;
                bits.push(mean > theta);
            }
        }
    }
    SemanticTokenMask::new(dims, theta, bits)
}

/// Fraction of intended tokens, `ρ_s = N_s / (t·h·w)`.
pub fn intended_ratio(mask: &SemanticTokenMask) -> f64 {
    mask.intended_count() as f64 / mask.dims().len() as f64
}
