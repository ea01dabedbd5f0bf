use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::token::{GridGeometry, PixelMaskSequence, TokenGrid};

/// Parameters of a synthetic token grid and a moving-box pixel mask.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub geometry: GridGeometry,
    pub seed: u64,
    /// Half-width of the uniform drift of later slices around the reference.
    pub spread: u32,
    /// Box size as a fraction of each frame dimension.
    pub box_fraction: f64,
    /// Box motion in pixels per frame, `(dy, dx)`.
    pub velocity: (i32, i32),
}

impl FixtureSpec {
    pub fn new(geometry: GridGeometry, seed: u64) -> Self {
        Self {
            geometry,
            seed,
            spread: 2000,
            box_fraction: 0.5,
            velocity: (1, 2),
        }
    }
}

/// A generated grid and its pixel mask.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub grid: TokenGrid,
    pub pixel_mask: PixelMaskSequence,
}

/// Builds a fixture: the reference slice is uniform over the codebook,
/// later slices drift from it by a uniform offset in `[-spread, spread]`
/// (clipped), and the mask is a box bouncing across the frame.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    let g = spec.geometry;
    g.validate()?;
    if !(spec.box_fraction > 0.0 && spec.box_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "box fraction must lie in (0, 1], got {}",
            spec.box_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dims = g.dims();
    let slice = dims.slice_len();
    let n = i64::from(g.codebook_size);
    let spread = i64::from(spec.spread);

    let mut indices: Vec<u32> = (0..slice).map(|_| rng.gen_range(0..g.codebook_size)).collect();
    for k in slice..dims.len() {
        let offset = rng.gen_range(-spread..=spread);
        indices.push((i64::from(indices[k % slice]) + offset).clamp(0, n - 1) as u32);
    }
    let grid = TokenGrid::new(g, indices)?;

    let bh = ((f64::from(g.height) * spec.box_fraction).round() as u32).max(1);
    let bw = ((f64::from(g.width) * spec.box_fraction).round() as u32).max(1);
    let (span_y, span_x) = (g.height - bh, g.width - bw);
    let start = (rng.gen_range(0..=span_y), rng.gen_range(0..=span_x));
    let mut mask = PixelMaskSequence::filled(g.frames, g.height, g.width, false)?;
    for f in 0..g.frames {
        let y0 = bounce(start.0, spec.velocity.0, f, span_y);
        let x0 = bounce(start.1, spec.velocity.1, f, span_x);
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                mask.set(f, y, x, true);
            }
        }
    }
    Ok(Fixture {
        grid,
        pixel_mask: mask,
    })
}

/// Position after `frame` steps of `velocity`, reflected into `[0, span]`.
fn bounce(start: u32, velocity: i32, frame: u32, span: u32) -> u32 {
    if span == 0 {
        return 0;
    }
    let period = 2 * i64::from(span);
    let p = (i64::from(start) + i64::from(velocity) * i64::from(frame)).rem_euclid(period);
    (if p > i64::from(span) { period - p } else { p }) as u32
}
