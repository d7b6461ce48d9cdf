//! Through-wall link budget with and without the surface, then a fit of wall
//! loss and system offset to the bundled measurements.
//!
//! cargo run --release --example link_budget

use ris_sim::link::{calibrate, evaluate, read_observations};
use ris_sim::LinkScenario;

fn main() -> ris_sim::Result<()> {
    // Broadside directivity of the default 16x16 surface, rounded.
    let base = LinkScenario::prototype(22.6, 0.5);
    println!(
        "far-field distance of the aperture: {:.2} m (closer distances are flagged)\n",
        base.far_field_distance_m()
    );
    println!("d1_m   P_without_dBm  P_with_dBm  gain_dB  near_field");
    for d1 in [0.5, 1.0, 2.0, 4.0, 8.0] {
        let r = evaluate(&base.with_d1(d1))?;
        println!(
            "{d1:4.1} {:14.2} {:11.2} {:8.2}  {}",
            r.p_without_dbm,
            r.p_with_dbm,
            r.ris_gain_db,
            r.near_field.is_some()
        );
    }

    let obs = read_observations(concat!(env!("CARGO_MANIFEST_DIR"), "/data/through_wall.csv"))?;
    let cal = calibrate(&obs, &base, true)?;
    println!(
        "\nfit: wall loss {:.2} dB{}, offset {:.2} dB, worst residual {:.2} dB",
        cal.scenario.wall_loss_db,
        if cal.wall_loss_clamped { " (clamped)" } else { "" },
        cal.scenario.system_offset_db,
        cal.max_abs_residual()
    );
    for r in &cal.residuals {
        println!(
            "  d1={:.2} m  residual without {:+.2} dB  with {:+.2} dB",
            r.d1_m, r.without_db, r.with_db
        );
    }
    Ok(())
}
