//! Far-field synthesis of the fed, coded aperture.
//!
//! Each element is excited by the feed horn (a `cos^q` pattern with optional
//! spherical spreading and path phase), multiplied by its cell transmission,
//! and radiates with a `cos^{q_e}(theta)` element pattern:
//!
//! ```text
//! E(theta, phi) = cos^{q_e}(theta) * sum_i a_i * exp(j k (x_i u + y_i v))
//! a_i = cos^q(theta_f,i) * s_i * exp(-j k d_i) * t(state_i, f)
//! u = sin(theta) cos(phi),  v = sin(theta) sin(phi)
//! ```
//!
//! [`radiate`] evaluates this sum directly for any grid. [`radiate_fast`]
//! computes the same field on uniform u-v lattices with a separable,
//! zero-padded chirp-z transform. Only the forward hemisphere is modeled.

mod czt;
mod metrics;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::angle::cos_sin_deg;
use crate::cell::{CellState, UnitCellModel};
use crate::codebook::{CodeMatrix, PhaseMatrix};
use crate::error::{Error, Result};
use crate::geometry::ArrayLayout;
use crate::wavenumber;

pub use metrics::{metrics, PatternMetrics};

/// Feed and element pattern parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationModel {
    /// Feed horn exponent `q` in `cos^q(theta_f)`.
    pub feed_exponent: f64,
    /// Element pattern exponent `q_e` in `cos^{q_e}(theta)`.
    pub element_exponent: f64,
    /// Apply `1/d_i` amplitude spreading from the feed.
    pub spherical_spreading: bool,
    /// Apply the `exp(-j k d_i)` feed path phase.
    pub feed_path_phase: bool,
}

impl Default for IlluminationModel {
    fn default() -> Self {
        IlluminationModel {
            feed_exponent: 6.0,
            element_exponent: 1.0,
            spherical_spreading: true,
            feed_path_phase: true,
        }
    }
}

impl IlluminationModel {
    /// Equal, in-phase feed illumination of every element.
    pub fn uniform(element_exponent: f64) -> Self {
        IlluminationModel {
            feed_exponent: 0.0,
            element_exponent,
            spherical_spreading: false,
            feed_path_phase: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.feed_exponent.is_finite() && self.feed_exponent >= 0.0) {
            return Err(Error::invalid("feed_exponent", "must be finite and >= 0"));
        }
        if !(self.element_exponent.is_finite() && self.element_exponent >= 0.0) {
            return Err(Error::invalid("element_exponent", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Evenly spaced samples `start + i * step`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAxis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl UniformAxis {
    pub fn new(start: f64, step: f64, count: usize) -> Self {
        UniformAxis { start, step, count }
    }

    /// `count` samples spanning `[lo, hi]` inclusive.
    pub fn spanning(lo: f64, hi: f64, count: usize) -> Self {
        let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
        UniformAxis {
            start: lo,
            step,
            count,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    fn last(&self) -> f64 {
        self.value(self.count.saturating_sub(1))
    }
}

/// Observation directions.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularGrid {
    /// Product grid of `theta` (deg, [0, 90]) and `phi` (deg, [0, 360)),
    /// ordered phi-major.
    Polar { theta_deg: Vec<f64>, phi_deg: Vec<f64> },
    /// Rectangular lattice in direction cosines, ordered v-major. Every
    /// point must be visible (`u² + v² <= 1`).
    Uv { u: UniformAxis, v: UniformAxis },
}

/// One observation direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub u: f64,
    pub v: f64,
    pub cos_theta: f64,
}

impl Direction {
    pub fn from_angles(theta_deg: f64, phi_deg: f64) -> Self {
        let (ct, st) = cos_sin_deg(theta_deg);
        let (cp, sp) = cos_sin_deg(phi_deg);
        Direction {
            theta_deg,
            phi_deg,
            u: st * cp,
            v: st * sp,
            cos_theta: ct,
        }
    }

    pub fn from_uv(u: f64, v: f64) -> Self {
        let rho2 = u * u + v * v;
        let rho = rho2.sqrt().min(1.0);
        let phi = if rho == 0.0 {
            0.0
        } else {
            let p = v.atan2(u).to_degrees().rem_euclid(360.0);
            if p >= 360.0 {
                0.0
            } else {
                p
            }
        };
        Direction {
            theta_deg: rho.asin().to_degrees(),
            phi_deg: phi,
            u,
            v,
            cos_theta: (1.0 - rho2).max(0.0).sqrt(),
        }
    }

    /// Unit vector `(x, y, z)` with z along boresight.
    pub fn unit_vector(&self) -> [f64; 3] {
        [self.u, self.v, self.cos_theta]
    }

    pub fn from_unit_vector(p: [f64; 3]) -> Self {
        let z = p[2].clamp(-1.0, 1.0);
        let rho = p[0].hypot(p[1]);
        let theta = rho.atan2(z).to_degrees();
        let phi = if rho == 0.0 {
            0.0
        } else {
            let phi = p[1].atan2(p[0]).to_degrees().rem_euclid(360.0);
            if phi > 360.0 - 1e-9 {
                0.0
            } else {
                phi
            }
        };
        Direction {
            theta_deg: theta,
            phi_deg: phi,
            u: p[0],
            v: p[1],
            cos_theta: z,
        }
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl AngularGrid {
    pub fn polar(theta_deg: Vec<f64>, phi_deg: Vec<f64>) -> Result<Self> {
        if theta_deg.len() < 2 {
            return Err(Error::invalid("theta grid", "needs at least 2 samples"));
        }
        if phi_deg.is_empty() {
            return Err(Error::invalid("phi grid", "needs at least 1 sample"));
        }
        if !strictly_increasing(&theta_deg) || !strictly_increasing(&phi_deg) {
            return Err(Error::invalid("angular grid", "samples must be strictly increasing"));
        }
        if theta_deg.iter().any(|t| !(0.0..=90.0).contains(t)) {
            return Err(Error::invalid("theta grid", "samples must lie in [0, 90]"));
        }
        if phi_deg.iter().any(|p| !(0.0..360.0).contains(p)) {
            return Err(Error::invalid("phi grid", "samples must lie in [0, 360)"));
        }
        Ok(AngularGrid::Polar { theta_deg, phi_deg })
    }

    /// Principal cuts at `phi0` and `phi0 + 90°` (both half-planes each),
    /// theta from 0° to 90° at `step_deg`.
    pub fn principal_cuts(phi0_deg: f64, step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg <= 45.0) {
            return Err(Error::invalid("theta step", "must be in (0, 45]"));
        }
        let n = (90.0 / step_deg).round() as usize;
        let theta: Vec<f64> = (0..=n).map(|i| (i as f64 * step_deg).min(90.0)).collect();
        let mut phi: Vec<f64> = (0..4)
            .map(|k| (phi0_deg + 90.0 * k as f64).rem_euclid(360.0))
            .collect();
        phi.sort_by(f64::total_cmp);
        phi.dedup();
        Self::polar(theta, phi)
    }

    /// Default pattern grid: 0.5° theta steps on the principal cuts through `phi0`.
    pub fn default_cuts(phi0_deg: f64) -> Self {
        Self::principal_cuts(phi0_deg, 0.5).expect("valid default grid")
    }

    pub fn uv(u: UniformAxis, v: UniformAxis) -> Result<Self> {
        if u.count == 0 || v.count == 0 {
            return Err(Error::invalid("uv grid", "has an empty axis"));
        }
        if u.count * v.count < 2 {
            return Err(Error::invalid("uv grid", "needs at least 2 samples"));
        }
        for a in [u, v] {
            if !(a.start.is_finite() && a.step.is_finite()) || (a.count > 1 && a.step <= 0.0) {
                return Err(Error::invalid("uv grid", "axis steps must be positive and finite"));
            }
        }
        let umax = u.start.abs().max(u.last().abs());
        let vmax = v.start.abs().max(v.last().abs());
        if umax * umax + vmax * vmax > 1.0 + 1e-12 {
            return Err(Error::invalid("uv grid", "extends outside the visible region"));
        }
        Ok(AngularGrid::Uv { u, v })
    }

    /// `n` points along u in [-1, 1] at v = 0 (the phi = 0°/180° plane).
    pub fn uv_cut_x(n: usize) -> Result<Self> {
        Self::uv(UniformAxis::spanning(-1.0, 1.0, n), UniformAxis::new(0.0, 0.0, 1))
    }

    /// `n` points along v in [-1, 1] at u = 0 (the phi = 90°/270° plane).
    pub fn uv_cut_y(n: usize) -> Result<Self> {
        Self::uv(UniformAxis::new(0.0, 0.0, 1), UniformAxis::spanning(-1.0, 1.0, n))
    }

    pub fn len(&self) -> usize {
        match self {
            AngularGrid::Polar { theta_deg, phi_deg } => theta_deg.len() * phi_deg.len(),
            AngularGrid::Uv { u, v } => u.count * v.count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn directions(&self) -> Vec<Direction> {
        match self {
            AngularGrid::Polar { theta_deg, phi_deg } => phi_deg
                .iter()
                .flat_map(|&p| theta_deg.iter().map(move |&t| Direction::from_angles(t, p)))
                .collect(),
            AngularGrid::Uv { u, v } => (0..v.count)
                .flat_map(|n| (0..u.count).map(move |m| Direction::from_uv(u.value(m), v.value(n))))
                .collect(),
        }
    }
}

/// Per-element complex excitation of a fed, coded aperture.
///
/// This is everything the far-field sum needs; patterns keep a shared handle
/// so metrics can resample the field off the original grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Aperture {
    k: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    excitation: Vec<Complex64>,
    element_exponent: f64,
}

impl Aperture {
    fn build(
        layout: &ArrayLayout,
        illum: &IlluminationModel,
        freq_hz: f64,
        cell: impl Fn(usize) -> Result<Complex64>,
    ) -> Result<Self> {
        illum.validate()?;
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(Error::invalid("frequency", format!("must be positive, got {freq_hz}")));
        }
        let k = wavenumber(freq_hz);
        let f = layout.feed_distance();
        let mut excitation = Vec::with_capacity(layout.len());
        for i in 0..layout.len() {
            let (x, y) = layout.position(i);
            let d = layout.feed_distance_at(x, y);
            let mut amp = (f / d).powf(illum.feed_exponent);
            if illum.spherical_spreading {
                amp /= d;
            }
            let feed = if illum.feed_path_phase {
                Complex64::from_polar(amp, -k * d)
            } else {
                Complex64::new(amp, 0.0)
            };
            excitation.push(feed * cell(i)?);
        }
        Ok(Aperture {
            k,
            xs: (0..layout.cols()).map(|c| layout.x_of_col(c)).collect(),
            ys: (0..layout.rows()).map(|r| layout.y_of_row(r)).collect(),
            excitation,
            element_exponent: illum.element_exponent,
        })
    }

    /// Aperture driven by a 1-bit code through `model`.
    pub fn from_code(
        layout: &ArrayLayout,
        model: &UnitCellModel,
        illum: &IlluminationModel,
        code: &CodeMatrix,
        freq_hz: f64,
    ) -> Result<Self> {
        code.check_layout(layout)?;
        let t0 = model.transmission(CellState::Zero, freq_hz)?;
        let t1 = model.transmission(CellState::One, freq_hz)?;
        Self::build(layout, illum, freq_hz, |i| Ok(if code.bits()[i] { t1 } else { t0 }))
    }

    /// Aperture with unquantized phases `exp(j phi_i)` at the state-0 magnitude of `model`.
    pub fn from_phases(
        layout: &ArrayLayout,
        model: &UnitCellModel,
        illum: &IlluminationModel,
        phases: &PhaseMatrix,
        freq_hz: f64,
    ) -> Result<Self> {
        if phases.rows() != layout.rows() || phases.cols() != layout.cols() {
            return Err(Error::DimensionMismatch {
                expected_rows: layout.rows(),
                expected_cols: layout.cols(),
                rows: phases.rows(),
                cols: phases.cols(),
            });
        }
        let mag = model.transmission(CellState::Zero, freq_hz)?.norm();
        Self::build(layout, illum, freq_hz, |i| {
            Ok(Complex64::from_polar(mag, phases.values()[i]))
        })
    }

    pub fn excitation(&self) -> &[Complex64] {
        &self.excitation
    }

    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.ys.len()
    }

    pub fn cols(&self) -> usize {
        self.xs.len()
    }

    pub(crate) fn element_factor(&self, cos_theta: f64) -> f64 {
        if self.element_exponent == 0.0 {
            1.0
        } else {
            cos_theta.max(0.0).powf(self.element_exponent)
        }
    }

    /// Field in direction `dir`, summed element by element in a fixed order.
    pub fn field(&self, dir: &Direction) -> Complex64 {
        let cols = self.xs.len();
        let col_phasors: Vec<Complex64> = self
            .xs
            .iter()
            .map(|&x| Complex64::from_polar(1.0, self.k * x * dir.u))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (r, &y) in self.ys.iter().enumerate() {
            let row = &self.excitation[r * cols..(r + 1) * cols];
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, p) in row.iter().zip(&col_phasors) {
                acc += a * p;
            }
            total += Complex64::from_polar(1.0, self.k * y * dir.v) * acc;
        }
        total * self.element_factor(dir.cos_theta)
    }

    /// Upper bound on `|E|` over all directions.
    pub fn field_bound(&self) -> f64 {
        self.excitation.iter().map(|a| a.norm()).sum()
    }
}

/// Sampled far field plus the aperture that produced it.
#[derive(Debug, Clone)]
pub struct FarFieldPattern {
    grid: AngularGrid,
    directions: Vec<Direction>,
    field: Vec<Complex64>,
    peak: f64,
    aperture: Arc<Aperture>,
}

/// Floor for normalized magnitudes so exported values stay finite at exact nulls.
pub const MAG_DB_FLOOR: f64 = -400.0;

impl FarFieldPattern {
    fn new(grid: AngularGrid, directions: Vec<Direction>, field: Vec<Complex64>, aperture: Aperture) -> Self {
        let peak = field.iter().map(|e| e.norm()).fold(0.0, f64::max);
        FarFieldPattern {
            grid,
            directions,
            field,
            peak,
            aperture: Arc::new(aperture),
        }
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn field(&self) -> &[Complex64] {
        &self.field
    }

    pub fn aperture(&self) -> &Aperture {
        &self.aperture
    }

    /// Largest sampled `|E|`.
    pub fn peak_magnitude(&self) -> f64 {
        self.peak
    }

    /// `|E|` in dB relative to the sampled peak, floored at [`MAG_DB_FLOOR`].
    pub fn normalized_db(&self) -> Vec<f64> {
        self.field
            .iter()
            .map(|e| {
                if self.peak == 0.0 {
                    MAG_DB_FLOOR
                } else {
                    (20.0 * (e.norm() / self.peak).log10()).max(MAG_DB_FLOOR)
                }
            })
            .collect()
    }

    /// Forward-hemisphere directivity (linear) at the sampled peak.
    pub fn directivity(&self) -> Result<f64> {
        if self.peak == 0.0 {
            return Err(Error::ZeroPattern);
        }
        let (integral, max_sq) = metrics::hemisphere_power(&self.aperture);
        Ok(4.0 * std::f64::consts::PI * (self.peak * self.peak).max(max_sq) / integral)
    }

    /// CSV with header `theta_deg,phi_deg,mag_db,real,imag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta_deg,phi_deg,mag_db,real,imag\n");
        for ((d, e), db) in self.directions.iter().zip(&self.field).zip(self.normalized_db()) {
            out.push_str(&format!(
                "{:.4},{:.4},{:.6},{:.12e},{:.12e}\n",
                d.theta_deg, d.phi_deg, db, e.re, e.im
            ));
        }
        out
    }
}

fn evaluate(aperture: &Aperture, dirs: &[Direction]) -> Vec<Complex64> {
    dirs.par_iter().map(|d| aperture.field(d)).collect()
}

/// Direct far-field evaluation of a coded aperture on any grid.
pub fn radiate(
    layout: &ArrayLayout,
    model: &UnitCellModel,
    illum: &IlluminationModel,
    code: &CodeMatrix,
    freq_hz: f64,
    grid: &AngularGrid,
) -> Result<FarFieldPattern> {
    let aperture = Aperture::from_code(layout, model, illum, code, freq_hz)?;
    Ok(radiate_aperture(aperture, grid))
}

/// Direct evaluation with unquantized element phases.
pub fn radiate_phases(
    layout: &ArrayLayout,
    model: &UnitCellModel,
    illum: &IlluminationModel,
    phases: &PhaseMatrix,
    freq_hz: f64,
    grid: &AngularGrid,
) -> Result<FarFieldPattern> {
    let aperture = Aperture::from_phases(layout, model, illum, phases, freq_hz)?;
    Ok(radiate_aperture(aperture, grid))
}

pub fn radiate_aperture(aperture: Aperture, grid: &AngularGrid) -> FarFieldPattern {
    let dirs = grid.directions();
    let field = evaluate(&aperture, &dirs);
    FarFieldPattern::new(grid.clone(), dirs, field, aperture)
}

/// Transform-accelerated evaluation; requires an [`AngularGrid::Uv`] lattice.
pub fn radiate_fast(
    layout: &ArrayLayout,
    model: &UnitCellModel,
    illum: &IlluminationModel,
    code: &CodeMatrix,
    freq_hz: f64,
    grid: &AngularGrid,
) -> Result<FarFieldPattern> {
    let AngularGrid::Uv { u, v } = grid else {
        return Err(Error::NonUniformGrid);
    };
    let aperture = Aperture::from_code(layout, model, illum, code, freq_hz)?;
    let field = czt::uv_field(&aperture, layout.period(), u, v);
    let dirs = grid.directions();
    let field = field
        .into_iter()
        .zip(&dirs)
        .map(|(e, d)| e * aperture.element_factor(d.cos_theta))
        .collect();
    Ok(FarFieldPattern::new(grid.clone(), dirs, field, aperture))
}
