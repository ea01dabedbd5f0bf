//! Joint precision and MCS selection across SNR for 700 intended and 300
//! non-intended tokens.

use tokencom::link::{optimize, BlerTable, ClassCounts, LinkProfile};

fn main() -> tokencom::Result<()> {
    let table = BlerTable::default_table();
    let counts = ClassCounts::new(700, 300);
    println!("snr   intended        non-intended     D_tot     tau_tot(ms)  J");
    for snr in [-4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
        let profile = LinkProfile {
            snr_db: snr,
            ..LinkProfile::default()
        };
        match optimize(&profile, &table, counts) {
            Ok(plan) => println!(
                "{snr:4}  {:14}  {:15}  {:8.4}  {:11.3}  {:.4}",
                plan.intended.name(),
                plan.non_intended.name(),
                plan.total_distortion,
                plan.total_delay_s * 1e3,
                plan.objective
            ),
            Err(e) => println!("{snr:4}  {e}"),
        }
    }
    Ok(())
}
