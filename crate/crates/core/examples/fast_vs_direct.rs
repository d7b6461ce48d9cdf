//! Evaluate the same coded aperture on a u-v lattice twice, once by direct
//! summation and once through the chirp-z transform, and compare.
//!
//! cargo run --release --example fast_vs_direct

use std::time::Instant;

use ris_sim::codebook::code_for;
use ris_sim::farfield::{radiate, radiate_fast, UniformAxis};
use ris_sim::{AngularGrid, ArrayLayout, BeamTarget, IlluminationModel, UnitCellModel};

fn main() -> ris_sim::Result<()> {
    let f = 5.8e9;
    let layout = ArrayLayout::default();
    let model = UnitCellModel::ideal(0.0)?;
    let illum = IlluminationModel::default();
    let code = code_for(&layout, &BeamTarget::new(30.0, 45.0, f)?);

    for n in [61, 121, 241] {
        let axis = UniformAxis::spanning(-0.7, 0.7, n);
        let grid = AngularGrid::uv(axis, axis)?;

        let t = Instant::now();
        let direct = radiate(&layout, &model, &illum, &code, f, &grid)?;
        let t_direct = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let fast = radiate_fast(&layout, &model, &illum, &code, f, &grid)?;
        let t_fast = t.elapsed().as_secs_f64();

        let err = direct
            .field()
            .iter()
            .zip(fast.field())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / direct.peak_magnitude();
        println!(
            "{n:4}x{n:<4} points  direct {t_direct:8.4} s  fast {t_fast:8.4} s  max relative error {err:.2e}"
        );
    }
    Ok(())
}
