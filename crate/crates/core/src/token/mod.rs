//! Token grids, semantic masks, their file formats, and pixel-to-token
//! mask pooling.
//!
//! All arrays are stored row-major in `(τ, i, j)` order: temporal slice
//! first, then row, then column.

pub(crate) mod grid;
mod mask;
mod pool;

pub use grid::{GridGeometry, TokenDims, TokenGrid};
pub use mask::{PixelMaskSequence, SemanticTokenMask, TokenClass};
pub use pool::{intended_ratio, pool_pixel_masks};
