//! Steer the default 16×16 surface to 0°, 10° and 45° and compare the 1-bit
//! code against the unquantized phase distribution.
//!
//! cargo run --release --example scan_patterns

use std::time::Instant;

use ris_sim::codebook::{phase_compensation, quantize_1bit};
use ris_sim::farfield::{metrics, radiate, radiate_phases};
use ris_sim::{AngularGrid, ArrayLayout, BeamTarget, IlluminationModel, UnitCellModel};

fn main() -> ris_sim::Result<()> {
    let layout = ArrayLayout::default();
    let model = UnitCellModel::ideal(0.0)?;
    let illum = IlluminationModel::default();
    let f = 5.8e9;

    println!("target  peak_theta  peak_phi  hpbw_el  SLL_dB  D_1bit_dBi  D_cont_dBi  time_s");
    for theta0 in [0.0, 10.0, 45.0] {
        let start = Instant::now();
        let target = BeamTarget::new(theta0, 0.0, f)?;
        let phases = phase_compensation(&layout, &target);
        let code = quantize_1bit(&phases);
        let grid = AngularGrid::default_cuts(0.0);
        let m = metrics(&radiate(&layout, &model, &illum, &code, f, &grid)?)?;
        let elapsed = start.elapsed().as_secs_f64();
        let cont = metrics(&radiate_phases(&layout, &model, &illum, &phases, f, &grid)?)?;
        println!(
            "{theta0:6.1}  {:10.3}  {:8.2}  {:7.2}  {:6.2}  {:10.3}  {:10.3}  {elapsed:6.2}",
            m.peak_theta_deg,
            m.peak_phi_deg,
            m.hpbw_deg[0].unwrap_or(f64::NAN),
            m.sidelobe_db.unwrap_or(f64::NAN),
            m.directivity_dbi(),
            cont.directivity_dbi(),
        );
    }
    let bound = 10.0 * (4.0 * std::f64::consts::PI * layout.aperture_area() / ris_sim::wavelength(f).powi(2)).log10();
    println!("aperture limit 4πA/λ² = {bound:.3} dBi");
    Ok(())
}
