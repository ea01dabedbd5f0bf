//! Sweeps SNR and bandwidth and prints the objective surface; the full
//! report is written as JSON when a path is given.

use tokencom::link::BlerTable;
use tokencom::report::{generate_fixture, sweep, FixtureSpec, SweepSpec};
use tokencom::token::{pool_pixel_masks, GridGeometry};

fn main() -> tokencom::Result<()> {
    let geometry = GridGeometry::new(64000, 12, 96, 96, 2, 8)?;
    let fixture = generate_fixture(&FixtureSpec::new(geometry, 5))?;
    let mask = pool_pixel_masks(&fixture.pixel_mask, &geometry, 0.5)?;

    let spec = SweepSpec {
        snr_db: vec![-2.0, 0.0, 2.0, 4.0, 6.0, 8.0],
        bandwidth_hz: vec![330e3, 340e3, 350e3, 360e3],
        trials: 50,
        ..SweepSpec::default()
    };
    let report = sweep(&spec, &BlerTable::default_table(), &fixture.grid, &mask)?;
    println!("rho_s {:.4}, counts {:?}", report.rho_s, report.counts);
    for p in &report.points {
        match &p.plan {
            Some(plan) => println!(
                "{:4} dB {:6.0} kHz  {:14} {:15}  J {:.4}  D {:.3}  util {:.3}",
                p.snr_db,
                p.bandwidth_hz / 1e3,
                plan.intended.name(),
                plan.non_intended.name(),
                plan.objective,
                plan.total_distortion,
                plan.utilization()
            ),
            None => println!("{:4} dB {:6.0} kHz  infeasible", p.snr_db, p.bandwidth_hz / 1e3),
        }
    }
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, report.to_json())?;
        println!("wrote {path}");
    }
    Ok(())
}
