//! Compare the three unit-cell models across the band: ideal switch,
//! PIN-diode circuit and tabulated S21.
//!
//! cargo run --release --example unit_cell_models

use ris_sim::cell::{BandReference, CellState, CircuitResponse, DiodeState};
use ris_sim::{DiodeCircuitModel, S21Table, UnitCellModel};

fn main() -> ris_sim::Result<()> {
    let diode = DiodeCircuitModel::default();
    for f in [5.4e9, 5.8e9, 6.6e9] {
        let on = diode.impedance(DiodeState::On, f)?;
        let off = diode.impedance(DiodeState::Off, f)?;
        println!("{:.1} GHz  Z_on = {:.3}{:+.3}j Ω   Z_off = {:.2}{:+.2}j Ω", f / 1e9, on.re, on.im, off.re, off.im);
    }
    println!();

    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    let models = [
        ("ideal", UnitCellModel::ideal(0.5)?),
        ("circuit", UnitCellModel::circuit(diode, CircuitResponse::default())?),
        ("measured", UnitCellModel::tabulated(S21Table::from_path(format!("{data}/s21_measured.csv"))?)),
        ("simulated", UnitCellModel::tabulated(S21Table::from_path(format!("{data}/s21_simulated.csv"))?)),
    ];
    println!("model       f_GHz   |t0|_dB  |t1|_dB  Δphase_deg");
    for (name, m) in &models {
        for f in [5.4e9, 5.8e9, 6.2e9, 6.6e9] {
            let (m0, _) = m.response(CellState::Zero, f)?;
            let (m1, _) = m.response(CellState::One, f)?;
            println!(
                "{name:10} {:6.2} {m0:9.2} {m1:8.2} {:11.1}",
                f / 1e9,
                m.state_phase_difference(f)?
            );
        }
    }
    println!();
    for (name, m) in &models[1..] {
        for (label, reference) in [("absolute", BandReference::Absolute), ("relative", BandReference::RelativeToMax)] {
            match m.three_db_bandwidth(5.8e9, reference) {
                Ok(bw) => println!("{name:10} {label} 3 dB bandwidth around 5.8 GHz: {:.2} %", 100.0 * bw),
                Err(e) => println!("{name:10} {label} 3 dB bandwidth: none ({e})"),
            }
        }
    }
    Ok(())
}
