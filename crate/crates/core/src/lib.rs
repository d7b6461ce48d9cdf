//! Simulator for a 1-bit transmissive reconfigurable intelligent surface (RIS).
//!
//! A horn-fed planar aperture of two-state unit cells is steered by
//! quantizing the feed-compensating phase of every cell to {0, π}. The crate
//! covers the full chain:
//!
//! - [`geometry`]: element grid and feed placement
//! - [`cell`]: unit-cell transmission models (ideal, PIN-diode circuit, tabulated S21)
//! - [`codebook`]: phase compensation and 1-bit code matrices
//! - [`farfield`]: far-field synthesis (direct and transform-accelerated) and pattern metrics
//! - [`link`]: through-wall link budget with and without the surface, plus calibration
//! - [`control`]: bias-line control frames for the 16×16 prototype board
//! - [`cli`]: the `ris-sim` command implementations
//!
//! See the `examples/` directory of this crate for one runnable program per capability.

pub mod angle;
pub mod cell;
pub mod cli;
pub mod codebook;
pub mod config;
pub mod control;
pub mod error;
pub mod farfield;
pub mod geometry;
pub mod link;

pub use cell::{DiodeCircuitModel, DiodeState, S21Table, UnitCellModel};
pub use codebook::{BeamTarget, CodeMatrix, PhaseMatrix};
pub use control::ControlFrame;
pub use error::{Error, Result};
pub use farfield::{AngularGrid, FarFieldPattern, IlluminationModel, PatternMetrics};
pub use geometry::ArrayLayout;
pub use link::{LinkResult, LinkScenario};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wavelength (m) at `freq_hz`.
pub fn wavelength(freq_hz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_hz
}

/// Free-space wavenumber (rad/m) at `freq_hz`.
pub fn wavenumber(freq_hz: f64) -> f64 {
    2.0 * std::f64::consts::PI * freq_hz / SPEED_OF_LIGHT
}
