//! Packs an encoded grid into PDUs and runs the erasure channel under the
//! optimizer's choice.

use tokencom::channel::{pack_pdus, transmit, transmitted_counts, ClassLink};
use tokencom::codec::{encode, CodecConfig};
use tokencom::link::{optimize, BlerTable, LinkProfile};
use tokencom::report::{generate_fixture, simulate, FixtureSpec};
use tokencom::token::{pool_pixel_masks, GridGeometry};

fn main() -> tokencom::Result<()> {
    let geometry = GridGeometry::new(64000, 12, 96, 96, 2, 8)?;
    let fixture = generate_fixture(&FixtureSpec::new(geometry, 3))?;
    let mask = pool_pixel_masks(&fixture.pixel_mask, &geometry, 0.5)?;

    let profile = LinkProfile {
        snr_db: -2.0,
        ..LinkProfile::default()
    };
    let plan = optimize(&profile, &BlerTable::default_table(), transmitted_counts(&mask))?;
    println!("plan: {} / {}", plan.intended.name(), plan.non_intended.name());

    let stream = encode(&fixture.grid, &mask, &CodecConfig::new(64000, plan.non_intended.bits)?)?;
    let plans = pack_pdus(&stream, &mask, &profile.pdu)?;
    let links = ClassLink::from_plan(&plan, profile.bandwidth_hz);
    let outcome = transmit(&stream, &plans, &links, 42)?;
    println!("{}", outcome.report().to_json());

    let summary = simulate(&plan, &profile, &stream, &mask, 500, 0)?;
    for (label, s) in [("intended", summary.intended), ("non-intended", summary.non_intended)] {
        println!(
            "{label}: p {:.4}, observed loss {:.4}, erased tokens {:.1} +- {:.1}",
            s.loss_probability, s.loss_fraction, s.mean_tokens_erased, s.std_tokens_erased
        );
    }
    Ok(())
}
