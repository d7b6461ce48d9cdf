//! Compile a beam code into the 8-connector bias frame, show both
//! serializations and recover the code again.
//!
//! cargo run --release --example control_frame

use ris_sim::codebook::code_for;
use ris_sim::control::{compile, decompile, pin_for};
use ris_sim::{ArrayLayout, BeamTarget};

fn main() -> ris_sim::Result<()> {
    let layout = ArrayLayout::default();
    let a = code_for(&layout, &BeamTarget::new(15.0, 0.0, 5.8e9)?);
    let b = code_for(&layout, &BeamTarget::new(15.0, 90.0, 5.8e9)?);
    let frame = compile(&a)?;

    let (k, p) = pin_for(9, 3);
    println!("element (9, 3) is driven by connector C{k} pin {p}\n");
    print!("{frame}");
    let bytes = frame.to_bytes();
    let hex: Vec<String> = bytes.iter().map(|x| format!("{x:02x}")).collect();
    println!("\nwire bytes: {}", hex.join(""));

    let back = decompile(&ris_sim::ControlFrame::from_bytes(&bytes))?;
    assert_eq!(back, a);
    println!("decompiled code matches: {}", back == a);

    let other = compile(&b)?;
    println!(
        "switching to phi0=90: {} pins toggle ({} cells differ)",
        frame.hamming_distance(&other),
        a.hamming_distance(&b)
    );
    Ok(())
}
