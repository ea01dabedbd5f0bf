//! Pools a moving-box pixel mask onto the token grid at several thresholds.

use tokencom::report::{generate_fixture, FixtureSpec};
use tokencom::token::{intended_ratio, pool_pixel_masks, GridGeometry};

fn main() -> tokencom::Result<()> {
    let geometry = GridGeometry::new(64000, 16, 128, 128, 4, 16)?;
    let fixture = generate_fixture(&FixtureSpec::new(geometry, 7))?;
    let dims = geometry.dims();
    println!("token grid {}x{}x{}", dims.t, dims.h, dims.w);

    for theta in [0.1, 0.25, 0.5, 0.75, 1.0] {
        let mask = pool_pixel_masks(&fixture.pixel_mask, &geometry, theta)?;
        println!(
            "theta {theta:.2}: {:4} intended of {} (rho_s {:.4})",
            mask.intended_count(),
            dims.len(),
            intended_ratio(&mask)
        );
    }

    let mask = pool_pixel_masks(&fixture.pixel_mask, &geometry, 0.5)?;
    for tau in 0..dims.t.min(2) {
        println!("slice {tau}:");
        for i in 0..dims.h {
            let row: String = (0..dims.w)
                .map(|j| if mask.is_intended(tau, i, j) { '#' } else { '.' })
                .collect();
            println!("  {row}");
        }
    }
    Ok(())
}
