//! Lay out the default surface, compute the feed-compensating phase for a
//! steered beam and print the resulting 1-bit code.
//!
//! cargo run --release --example geometry_and_codebook -- [theta0_deg] [phi0_deg]

use ris_sim::codebook::{phase_compensation, quantize_1bit};
use ris_sim::{ArrayLayout, BeamTarget};

fn main() -> ris_sim::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("angle in degrees"));
    let theta0 = args.next().unwrap_or(20.0);
    let phi0 = args.next().unwrap_or(0.0);

    let layout = ArrayLayout::default();
    let d = layout.feed_distances();
    let (lo, hi) = d.iter().fold((f64::MAX, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    println!(
        "{}x{} cells, period {:.1} mm, aperture {:.4} m², feed path {:.2}..{:.2} mm",
        layout.rows(),
        layout.cols(),
        layout.period() * 1e3,
        layout.aperture_area(),
        lo * 1e3,
        hi * 1e3
    );

    let target = BeamTarget::new(theta0, phi0, 5.8e9)?;
    let phases = phase_compensation(&layout, &target);
    let code = quantize_1bit(&phases);
    println!("\nrequired phase (deg), corner 4x4:");
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|c| format!("{:7.1}", phases.get(r, c).to_degrees())).collect();
        println!("  {}", row.join(""));
    }
    println!("\ncode for theta0={theta0} phi0={phi0}, {} of {} cells in state 1:", code.count_ones(), layout.len());
    print!("{code}");

    let broadside = quantize_1bit(&phase_compensation(&layout, &BeamTarget::new(0.0, 0.0, 5.8e9)?));
    println!("\nbits changed relative to broadside: {}", code.hamming_distance(&broadside));
    Ok(())
}
