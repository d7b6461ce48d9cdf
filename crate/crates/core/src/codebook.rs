//! Beam-steering codebooks.
//!
//! For a horn-fed transmissive aperture, element `i` must add the phase
//!
//! ```text
//! phi_i = k * (d_i - sin(theta0) * (x_i cos(phi0) + y_i sin(phi0)))   (mod 2π)
//! ```
//!
//! so that the spherical feed wave leaves the surface as a plane wave toward
//! `(theta0, phi0)`. Here `d_i` is the feed-to-element distance and
//! `k = 2π/λ`. The continuous phase is then rounded to the nearest of the two
//! cell states {0, π}.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::angle::cos_sin_deg;
use crate::error::{Error, Result};
use crate::geometry::ArrayLayout;
use crate::wavenumber;

/// Steering direction and operating frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamTarget {
    theta0_deg: f64,
    phi0_deg: f64,
    freq_hz: f64,
}

impl BeamTarget {
    pub fn new(theta0_deg: f64, phi0_deg: f64, freq_hz: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&theta0_deg) {
            return Err(Error::invalid("theta0", format!("out of range [0, 90), got {theta0_deg}")));
        }
        if !(0.0..360.0).contains(&phi0_deg) {
            return Err(Error::invalid("phi0", format!("out of range [0, 360), got {phi0_deg}")));
        }
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(Error::invalid("frequency", format!("must be positive, got {freq_hz}")));
        }
        Ok(BeamTarget {
            theta0_deg,
            phi0_deg,
            freq_hz,
        })
    }

    pub fn theta0_deg(&self) -> f64 {
        self.theta0_deg
    }

    pub fn phi0_deg(&self) -> f64 {
        self.phi0_deg
    }

    pub fn freq_hz(&self) -> f64 {
        self.freq_hz
    }
}

/// Row-major grid of phases in [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl PhaseMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols || rows == 0 || cols == 0 {
            return Err(Error::invalid("phase matrix", "value count does not match dimensions"));
        }
        if values.iter().any(|v| !(v.is_finite() && (0.0..TAU).contains(v))) {
            return Err(Error::invalid("phase matrix", "entries must lie in [0, 2π)"));
        }
        Ok(PhaseMatrix { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV export: one line per row (row 0 first), radians with 12 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.12}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Binary state assignment, row-major; row 0 is the smallest `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl CodeMatrix {
    pub fn new(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 || bits.len() != rows * cols {
            return Err(Error::invalid("code matrix", "bit count does not match its dimensions"));
        }
        Ok(CodeMatrix { rows, cols, bits })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CodeMatrix {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let bits = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        CodeMatrix { rows, cols, bits }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, bit: bool) {
        self.bits[row * self.cols + col] = bit;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn hamming_distance(&self, other: &CodeMatrix) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }

    /// Rotation by 180° about the grid center.
    pub fn rotated_half_turn(&self) -> CodeMatrix {
        let mut bits = self.bits.clone();
        bits.reverse();
        CodeMatrix {
            rows: self.rows,
            cols: self.cols,
            bits,
        }
    }

    pub fn transposed(&self) -> CodeMatrix {
        CodeMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn flipped_rows(&self) -> CodeMatrix {
        CodeMatrix::from_fn(self.rows, self.cols, |r, c| self.get(self.rows - 1 - r, c))
    }

    pub fn flipped_cols(&self) -> CodeMatrix {
        CodeMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, self.cols - 1 - c))
    }

    pub fn check_layout(&self, layout: &ArrayLayout) -> Result<()> {
        if self.rows != layout.rows() || self.cols != layout.cols() {
            return Err(Error::DimensionMismatch {
                expected_rows: layout.rows(),
                expected_cols: layout.cols(),
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    /// Parses the text format; `source` names the input in errors.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut rows = 0;
        let mut cols = None;
        let mut bits = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let start = bits.len();
            for (col, ch) in line.chars().enumerate() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    other => {
                        return Err(Error::parse(
                            source,
                            n + 1,
                            format!("column {}: unexpected character {other:?}", col + 1),
                        ))
                    }
                }
            }
            let width = bits.len() - start;
            match cols {
                None => cols = Some(width),
                Some(c) if c != width => {
                    return Err(Error::parse(
                        source,
                        n + 1,
                        format!("row has {width} cells, expected {c}"),
                    ))
                }
                _ => {}
            }
            rows += 1;
        }
        let cols = cols.ok_or_else(|| Error::parse(source, 0, "no rows"))?;
        CodeMatrix::new(rows, cols, bits)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

impl fmt::Display for CodeMatrix {
    /// One line per row, `0`/`1` characters, row 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.bits.chunks(self.cols) {
            for &b in row {
                f.write_str(if b { "1" } else { "0" })?;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

impl FromStr for CodeMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodeMatrix::parse(s, "<string>")
    }
}

fn reduce_2pi(v: f64) -> f64 {
    let r = v.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Feed-compensating, steering phase for every element.
pub fn phase_compensation(layout: &ArrayLayout, target: &BeamTarget) -> PhaseMatrix {
    let k = wavenumber(target.freq_hz);
    let (cos_p, sin_p) = cos_sin_deg(target.phi0_deg);
    let sin_t = cos_sin_deg(target.theta0_deg).1;
    let values = (0..layout.len())
        .map(|i| {
            let (x, y) = layout.position(i);
            let d = layout.feed_distance_at(x, y);
            reduce_2pi(k * (d - sin_t * (x * cos_p + y * sin_p)))
        })
        .collect();
    PhaseMatrix {
        rows: layout.rows(),
        cols: layout.cols(),
        values,
    }
}

/// Rounds one phase in [0, 2π) to the nearest 1-bit state.
///
/// `[π/2, 3π/2)` maps to 1, the rest to 0.
pub fn quantize_phase(phase: f64) -> bool {
    (FRAC_PI_2..3.0 * FRAC_PI_2).contains(&phase)
}

pub fn quantize_1bit(phases: &PhaseMatrix) -> CodeMatrix {
    CodeMatrix {
        rows: phases.rows,
        cols: phases.cols,
        bits: phases.values.iter().map(|&p| quantize_phase(p)).collect(),
    }
}

/// Code matrix steering toward `target`.
pub fn code_for(layout: &ArrayLayout, target: &BeamTarget) -> CodeMatrix {
    quantize_1bit(&phase_compensation(layout, target))
}

/// Codebook for a list of targets, in input order.
pub fn scan_codebook(layout: &ArrayLayout, targets: &[BeamTarget]) -> Result<Vec<CodeMatrix>> {
    if targets.is_empty() {
        return Err(Error::invalid("targets", "must not be empty"));
    }
    Ok(targets.iter().map(|t| code_for(layout, t)).collect())
}

/// Complement of the phase on the circle: `p + π` reduced to [0, 2π).
pub fn opposite_phase(p: f64) -> f64 {
    reduce_2pi(p + PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: f64 = 5.8e9;

    #[test]
    fn single_element_phase() {
        let l = ArrayLayout::new(1, 1, 0.018, 0.26).unwrap();
        let t = BeamTarget::new(0.0, 0.0, F).unwrap();
        let p = phase_compensation(&l, &t);
        assert!((p.get(0, 0) - 0.18941).abs() < 1e-4, "{}", p.get(0, 0));
    }

    #[test]
    fn broadside_phase_depends_only_on_distance() {
        let l = ArrayLayout::default();
        let t = BeamTarget::new(0.0, 37.0, F).unwrap();
        let p = phase_compensation(&l, &t);
        let k = wavenumber(F);
        for (i, d) in l.feed_distances().into_iter().enumerate() {
            assert_eq!(p.values()[i], reduce_2pi(k * d));
        }
    }

    #[test]
    fn quantizer_codepoints_and_ties() {
        assert!(!quantize_phase(0.0));
        assert!(quantize_phase(PI));
        assert!(quantize_phase(FRAC_PI_2));
        assert!(!quantize_phase(3.0 * FRAC_PI_2));
        assert!(!quantize_phase(TAU - 1e-12));
    }

    #[test]
    fn target_validation() {
        assert!(BeamTarget::new(90.0, 0.0, F).is_err());
        assert!(BeamTarget::new(100.0, 0.0, F).is_err());
        assert!(BeamTarget::new(10.0, 360.0, F).is_err());
        assert!(BeamTarget::new(10.0, 0.0, 0.0).is_err());
        let err = BeamTarget::new(100.0, 0.0, F).unwrap_err().to_string();
        assert!(err.contains("theta0") && err.contains("out of range"), "{err}");
    }

    #[test]
    fn scan_codebook_distinct_and_ordered() {
        let l = ArrayLayout::default();
        let targets: Vec<_> = [0.0, 10.0, 45.0]
            .iter()
            .map(|&t| BeamTarget::new(t, 0.0, F).unwrap())
            .collect();
        let book = scan_codebook(&l, &targets).unwrap();
        assert_eq!(book.len(), 3);
        assert_ne!(book[0], book[1]);
        assert_ne!(book[1], book[2]);
        assert_ne!(book[0], book[2]);
        let dup = scan_codebook(&l, &[targets[1], targets[1]]).unwrap();
        assert_eq!(dup[0], dup[1]);
        assert_eq!(dup[0], book[1]);
        assert!(scan_codebook(&l, &[]).is_err());
    }

    #[test]
    fn code_text_round_trip_and_errors() {
        let c = CodeMatrix::from_fn(3, 4, |r, c| (r + c) % 3 == 0);
        let text = format!("# comment\n{c}");
        assert_eq!(CodeMatrix::parse(&text, "x").unwrap(), c);
        match CodeMatrix::parse("010\n0a0\n", "x") {
            Err(Error::Parse { line: 2, message, .. }) => assert!(message.contains("column 2")),
            other => panic!("{other:?}"),
        }
        assert!(CodeMatrix::parse("010\n01\n", "x").is_err());
        assert!(CodeMatrix::parse("# nothing\n", "x").is_err());
    }

    #[test]
    fn phase_csv_shape() {
        let l = ArrayLayout::new(2, 3, 0.018, 0.26).unwrap();
        let p = phase_compensation(&l, &BeamTarget::new(5.0, 0.0, F).unwrap());
        let csv = p.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().all(|l| l.split(',').count() == 3));
    }
}
