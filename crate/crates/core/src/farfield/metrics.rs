//! Pattern metrics: beam peak, half-power beamwidths, sidelobe level and
//! forward-hemisphere directivity.
//!
//! The sampled pattern only locates the coarse peak. Everything else is
//! resampled from the aperture: two principal cuts through the peak at
//! 0.05° and a 0.25° x 0.5° hemisphere grid for the power integral.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use super::{AngularGrid, Aperture, Direction, FarFieldPattern};
use crate::angle::cos_sin_deg;
use crate::error::{Error, Result};

const CUT_STEP_DEG: f64 = 0.05;
const INT_THETA_STEP_DEG: f64 = 0.25;
const INT_PHI_STEP_DEG: f64 = 0.5;
const MAIN_LOBE_FLOOR_DB: f64 = -10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PatternMetrics {
    pub peak_theta_deg: f64,
    pub peak_phi_deg: f64,
    /// Half-power beamwidth on the elevation cut through the peak (varying
    /// theta at the peak azimuth) and on the orthogonal great circle. `None`
    /// when the field never drops 3 dB within the visible hemisphere.
    pub hpbw_deg: [Option<f64>; 2],
    /// Highest lobe outside the main lobe on either cut, dB relative to the
    /// peak. `None` when neither cut has anything outside the main lobe.
    pub sidelobe_db: Option<f64>,
    /// Forward-hemisphere directivity (linear).
    pub directivity: f64,
}

impl PatternMetrics {
    pub fn directivity_dbi(&self) -> f64 {
        10.0 * self.directivity.log10()
    }

    /// Flat `key=value` block, one entry per line, fixed precision.
    pub fn to_key_value(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"));
        format!(
            "peak_theta_deg={:.6}\npeak_phi_deg={:.6}\nhpbw_elevation_deg={}\nhpbw_orthogonal_deg={}\nsidelobe_db={}\ndirectivity={:.6}\ndirectivity_dbi={:.6}\nhemisphere=forward\n",
            self.peak_theta_deg,
            self.peak_phi_deg,
            opt(self.hpbw_deg[0]),
            opt(self.hpbw_deg[1]),
            opt(self.sidelobe_db),
            self.directivity,
            self.directivity_dbi(),
        )
    }
}

impl fmt::Display for PatternMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_value())
    }
}

/// `(∫∫ |E|² sinθ dθ dφ, max |E|²)` over the forward hemisphere, trapezoidal in theta.
pub(crate) fn hemisphere_power(aperture: &Aperture) -> (f64, f64) {
    let nt = (90.0 / INT_THETA_STEP_DEG).round() as usize;
    let np = (360.0 / INT_PHI_STEP_DEG).round() as usize;
    let dt = INT_THETA_STEP_DEG.to_radians();
    let dp = INT_PHI_STEP_DEG.to_radians();
    let rows: Vec<(f64, f64)> = (0..=nt)
        .into_par_iter()
        .map(|i| {
            let theta = i as f64 * INT_THETA_STEP_DEG;
            let w = if i == 0 || i == nt { 0.5 } else { 1.0 };
            let sin_t = cos_sin_deg(theta).1;
            let mut sum = 0.0;
            let mut max: f64 = 0.0;
            let count = if i == 0 { 1 } else { np };
            for j in 0..count {
                let p = aperture.field(&Direction::from_angles(theta, j as f64 * INT_PHI_STEP_DEG));
                let s = p.norm_sqr();
                sum += s;
                max = max.max(s);
            }
            if i == 0 {
                sum *= np as f64;
            }
            (w * sin_t * sum, max)
        })
        .collect();
    let integral = rows.iter().map(|r| r.0).sum::<f64>() * dt * dp;
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    (integral, max)
}

// A great-circle cut through `center` with tangent `tangent`, sampled at
// signed angles in [-90, 90] degrees.
struct Cut {
    angles: Vec<f64>,
    mags: Vec<f64>,
}

impl Cut {
    fn sample(aperture: &Aperture, center: [f64; 3], tangent: [f64; 3]) -> Self {
        let n = (90.0 / CUT_STEP_DEG).round() as i64;
        let angles: Vec<f64> = (-n..=n).map(|i| i as f64 * CUT_STEP_DEG).collect();
        let mags = angles
            .par_iter()
            .map(|&a| aperture.field(&Self::direction(center, tangent, a)).norm())
            .collect();
        Cut { angles, mags }
    }

    fn direction(center: [f64; 3], tangent: [f64; 3], angle_deg: f64) -> Direction {
        let (c, s) = cos_sin_deg(angle_deg);
        let mut p = [0.0; 3];
        for i in 0..3 {
            p[i] = center[i] * c + tangent[i] * s;
        }
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        for v in &mut p {
            *v /= norm;
        }
        // Stay on the forward side at the horizon.
        p[2] = p[2].max(0.0);
        Direction::from_unit_vector(p)
    }

    // Largest sample; near-ties go to the one closest to the cut center.
    fn argmax(&self) -> usize {
        let top = self.mags.iter().copied().fold(0.0, f64::max);
        let near = |m: f64| m >= top * (1.0 - 1e-12);
        let mut best = 0;
        for (i, &m) in self.mags.iter().enumerate() {
            if near(m) && (!near(self.mags[best]) || self.angles[i].abs() < self.angles[best].abs()) {
                best = i;
            }
        }
        best
    }

    // Parabolic refinement of the peak angle.
    fn refined_peak_angle(&self) -> f64 {
        let j = self.argmax();
        if j == 0 || j + 1 == self.mags.len() {
            return self.angles[j];
        }
        let (a, b, c) = (self.mags[j - 1], self.mags[j], self.mags[j + 1]);
        let denom = a - 2.0 * b + c;
        let delta = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        self.angles[j] + delta.clamp(-0.5, 0.5) * CUT_STEP_DEG
    }

    fn db(&self, i: usize, reference: f64) -> f64 {
        20.0 * (self.mags[i] / reference).log10()
    }

    fn half_power_width(&self) -> Option<f64> {
        let j = self.argmax();
        let peak = self.mags[j];
        let level = -3.0;
        let cross = |from: usize, to: usize| -> f64 {
            let (a, b) = (self.db(from, peak), self.db(to, peak));
            let t = if a == b { 0.0 } else { (a - level) / (a - b) };
            self.angles[from] + t * (self.angles[to] - self.angles[from])
        };
        let mut hi = None;
        for i in j + 1..self.mags.len() {
            if self.db(i, peak) < level {
                hi = Some(cross(i - 1, i));
                break;
            }
        }
        let mut lo = None;
        for i in (0..j).rev() {
            if self.db(i, peak) < level {
                lo = Some(cross(i + 1, i));
                break;
            }
        }
        Some(hi? - lo?)
    }

    // Index range of the main lobe: out to the first local minimum below the floor.
    fn main_lobe(&self, reference: f64) -> (usize, usize) {
        let j = self.argmax();
        let n = self.mags.len();
        let is_floor_min = |i: usize| {
            let m = self.mags[i];
            m <= self.mags[i - 1] && m <= self.mags[i + 1] && self.db(i, reference) < MAIN_LOBE_FLOOR_DB
        };
        let hi = (j + 1..n - 1).find(|&i| is_floor_min(i)).unwrap_or(n - 1);
        let lo = (1..j).rev().find(|&i| is_floor_min(i)).unwrap_or(0);
        (lo, hi)
    }

    fn max_outside(&self, lo: usize, hi: usize) -> Option<f64> {
        self.mags[..lo]
            .iter()
            .chain(self.mags[hi + 1..].iter())
            .copied()
            .reduce(f64::max)
    }
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn coarse_peak(pattern: &FarFieldPattern) -> Result<usize> {
    let field = pattern.field();
    let dirs = pattern.directions();
    let top = pattern.peak_magnitude();
    // Ties within rounding go to the sample closest to boresight.
    let mut best = 0;
    for (i, e) in field.iter().enumerate() {
        let near_top = e.norm() >= top * (1.0 - 1e-12);
        let best_near_top = field[best].norm() >= top * (1.0 - 1e-12);
        if near_top && (!best_near_top || dirs[i].theta_deg < dirs[best].theta_deg) {
            best = i;
        }
    }
    if field[best].norm() == 0.0 {
        return Err(Error::ZeroPattern);
    }
    // A peak on an artificial grid boundary may belong to a lobe outside the grid.
    let clipped = match pattern.grid() {
        AngularGrid::Polar { theta_deg, .. } => {
            let edge = *theta_deg.last().unwrap();
            let t = pattern.directions()[best].theta_deg;
            edge < 90.0 && t == edge
        }
        AngularGrid::Uv { u, v } => {
            let (m, n) = (best % u.count, best / u.count);
            let d = pattern.directions()[best];
            let on_edge = (u.count > 1 && (m == 0 || m + 1 == u.count)) || (v.count > 1 && (n == 0 || n + 1 == v.count));
            on_edge && d.u * d.u + d.v * d.v < 1.0 - 1e-9
        }
    };
    if clipped {
        return Err(Error::MainLobeClipped);
    }
    Ok(best)
}

/// Peak direction, beamwidths, sidelobe level and directivity of `pattern`.
pub fn metrics(pattern: &FarFieldPattern) -> Result<PatternMetrics> {
    let best = coarse_peak(pattern)?;
    let aperture = pattern.aperture();
    let coarse = pattern.directions()[best];

    // Elevation cut: the vertical plane at the coarse peak azimuth.
    let (cp, sp) = cos_sin_deg(coarse.phi_deg);
    let elevation = Cut::sample(aperture, [0.0, 0.0, 1.0], [cp, sp, 0.0]);
    let s = elevation.refined_peak_angle();
    let p1 = Cut::direction([0.0, 0.0, 1.0], [cp, sp, 0.0], s).unit_vector();

    // Orthogonal great circle through the refined elevation peak.
    let tangent = [-sp, cp, 0.0];
    let orthogonal = Cut::sample(aperture, p1, tangent);
    let a = orthogonal.refined_peak_angle();
    let p2 = normalize(Cut::direction(p1, tangent, a).unit_vector());
    let mut peak_dir = Direction::from_unit_vector(p2);
    if peak_dir.theta_deg.abs() < 1e-9 {
        peak_dir.phi_deg = coarse.phi_deg;
    }

    let peak = aperture
        .field(&peak_dir)
        .norm()
        .max(elevation.mags[elevation.argmax()])
        .max(orthogonal.mags[orthogonal.argmax()])
        .max(pattern.peak_magnitude());

    let mut sidelobe: Option<f64> = None;
    for cut in [&elevation, &orthogonal] {
        let (lo, hi) = cut.main_lobe(peak);
        if let Some(m) = cut.max_outside(lo, hi) {
            sidelobe = Some(sidelobe.map_or(m, |s| s.max(m)));
        }
    }
    let sidelobe_db = sidelobe.map(|m| 20.0 * (m / peak).log10());

    let (integral, max_sq) = hemisphere_power(aperture);
    let directivity = 4.0 * PI * (peak * peak).max(max_sq) / integral;

    Ok(PatternMetrics {
        peak_theta_deg: peak_dir.theta_deg,
        peak_phi_deg: peak_dir.phi_deg,
        hpbw_deg: [elevation.half_power_width(), orthogonal.half_power_width()],
        sidelobe_db,
        directivity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::UnitCellModel;
    use crate::codebook::CodeMatrix;
    use crate::farfield::{radiate, IlluminationModel};
    use crate::geometry::ArrayLayout;
    use crate::wavelength;

    const F: f64 = 5.8e9;

    // Closed-form uniform line-array factor, sampled densely: first sidelobe in dB.
    fn uniform_line_sidelobe_oracle(n: usize) -> f64 {
        let af = |psi: f64| {
            let num = (n as f64 * psi / 2.0).sin();
            let den = n as f64 * (psi / 2.0).sin();
            if den.abs() < 1e-15 {
                1.0
            } else {
                (num / den).abs()
            }
        };
        // psi = pi sin(theta) for half-wave spacing; scan theta in (0, 90]
        let samples: Vec<f64> = (0..=900_000)
            .map(|i| af(PI * (i as f64 * 1e-4).to_radians().sin()))
            .collect();
        let mut i = 1;
        while samples[i] <= samples[i - 1] {
            i += 1;
        }
        let mut best = samples[i];
        while i < samples.len() && samples[i] >= samples[i - 1] {
            best = best.max(samples[i]);
            i += 1;
        }
        20.0 * best.log10()
    }

    #[test]
    fn uniform_line_array_first_sidelobe() {
        let want = uniform_line_sidelobe_oracle(8);
        assert!((want + 12.8).abs() < 0.05, "oracle {want}");
        let lam = wavelength(F);
        let layout = ArrayLayout::new(1, 8, lam / 2.0, 0.26).unwrap();
        let grid = AngularGrid::default_cuts(0.0);
        let p = radiate(
            &layout,
            &UnitCellModel::ideal(0.0).unwrap(),
            &IlluminationModel::uniform(0.0),
            &CodeMatrix::zeros(1, 8),
            F,
            &grid,
        )
        .unwrap();
        let m = metrics(&p).unwrap();
        assert!(m.peak_theta_deg.abs() < 1e-6, "{m:?}");
        let sll = m.sidelobe_db.unwrap();
        assert!((sll - want).abs() < 0.01, "{sll} vs {want}");
        assert!(m.hpbw_deg[0].unwrap() > 0.0);
    }

    #[test]
    fn isotropic_element_has_directivity_two() {
        let layout = ArrayLayout::new(1, 1, 0.018, 0.26).unwrap();
        let p = radiate(
            &layout,
            &UnitCellModel::ideal(0.0).unwrap(),
            &IlluminationModel::uniform(0.0),
            &CodeMatrix::zeros(1, 1),
            F,
            &AngularGrid::default_cuts(0.0),
        )
        .unwrap();
        let d = p.directivity().unwrap();
        assert!((d - 2.0).abs() < 1e-4, "{d}");
        let m = metrics(&p).unwrap();
        assert!((m.directivity_dbi() - 3.0103).abs() < 1e-3);
        assert_eq!(m.hpbw_deg, [None, None]);
        assert_eq!(m.sidelobe_db, None);
    }

    #[test]
    fn zero_pattern_and_clipped_lobe() {
        let layout = ArrayLayout::new(1, 2, 0.018, 0.26).unwrap();
        let model = UnitCellModel::ideal(0.0).unwrap();
        let illum = IlluminationModel::uniform(0.0);
        let grid = AngularGrid::polar(vec![0.0, 10.0, 20.0], vec![0.0]).unwrap();
        let p = radiate(&layout, &model, &illum, &CodeMatrix::zeros(1, 2), F, &grid).unwrap();
        assert!(metrics(&p).is_ok());
        let code = CodeMatrix::new(1, 2, vec![false, true]).unwrap();
        let p = radiate(&layout, &model, &illum, &code, F, &grid).unwrap();
        // Beam of the antiphase pair lies beyond 20 degrees.
        assert!(matches!(metrics(&p), Err(Error::MainLobeClipped)));

        // The circuit model transmits nothing far outside its band.
        let circuit = UnitCellModel::circuit(Default::default(), Default::default()).unwrap();
        let p = radiate(&layout, &circuit, &illum, &CodeMatrix::zeros(1, 2), 20e9, &grid).unwrap();
        assert!(matches!(metrics(&p), Err(Error::ZeroPattern)));
        assert!(p.normalized_db().iter().all(|v| v.is_finite()));
    }
}
