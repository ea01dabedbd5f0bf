//! Payload size, bits per pixel and mask side information as the intended
//! ratio and non-intended precision vary.

use tokencom::codec::{bpp_for_ratio, side_info_overhead, CodecConfig};

fn main() -> tokencom::Result<()> {
    println!("rho_s  b_delta  bpp(d_t=4,d_s=8)  side_info(t=4,g=4,B_mv=8)");
    for rho in [0.0, 0.3, 0.7, 1.0] {
        for delta in [16, 12, 10] {
            let cfg = CodecConfig::new(64000, delta)?;
            println!(
                "{rho:5.2}  {delta:7}  {:16.6}  {:24.5}",
                bpp_for_ratio(rho, &cfg, 4, 8),
                side_info_overhead(4, 4, 8, rho, &cfg)?
            );
        }
    }
    Ok(())
}
