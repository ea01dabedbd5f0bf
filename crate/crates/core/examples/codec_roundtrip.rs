//! Encodes a grid at several non-intended precisions and reports the
//! reconstruction error of each class.

use tokencom::codec::{decode, encode, CodecConfig, TokenBitstream};
use tokencom::report::{generate_fixture, FixtureSpec};
use tokencom::token::{pool_pixel_masks, GridGeometry};

fn main() -> tokencom::Result<()> {
    let geometry = GridGeometry::new(64000, 8, 64, 64, 2, 8)?;
    let fixture = generate_fixture(&FixtureSpec::new(geometry, 1))?;
    let grid = fixture.grid;
    let mask = pool_pixel_masks(&fixture.pixel_mask, &geometry, 0.5)?;

    for delta in [16, 13, 11, 10, 8] {
        let cfg = CodecConfig::new(64000, delta)?;
        let stream = encode(&grid, &mask, &cfg)?;
        let bytes = stream.to_bytes();
        let back = decode(&TokenBitstream::from_bytes(&bytes)?, &mask)?;

        let (mut exact, mut max_err) = (0usize, 0u32);
        for (k, (&a, &b)) in grid.indices().iter().zip(back.indices()).enumerate() {
            if mask.bits()[k] {
                assert_eq!(a, b, "intended tokens are exact");
            }
            if a == b {
                exact += 1;
            }
            max_err = max_err.max(a.abs_diff(b));
        }
        println!(
            "b_delta {delta:2}: {:5} bytes on disk, {exact}/{} tokens exact, max index error {max_err}",
            bytes.len(),
            grid.indices().len()
        );
    }
    Ok(())
}
