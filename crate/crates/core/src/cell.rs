//! Unit-cell transmission models.
//!
//! A cell has two states with (ideally) equal transmission magnitude and
//! opposite phase. Three interchangeable models produce the complex
//! transmission coefficient `t(state, f)`:
//!
//! - [`UnitCellModel::Ideal`]: flat insertion loss, phases exactly 0° / 180°.
//! - [`UnitCellModel::Circuit`]: phases 0° / 180°, magnitude from a
//!   phenomenological band shape calibrated to the PIN-diode cell's
//!   simulated response (peak loss at the design frequency, a raised-cosine
//!   power roll-off to the band-edge loss).
//! - [`UnitCellModel::Tabulated`]: linear interpolation of a measured or
//!   simulated S21 table, never extrapolated.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Bias state of a single PIN diode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiodeState {
    On,
    Off,
}

/// Coding state of a unit cell. `Zero` is the reference phase, `One` the inverted one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Zero,
    One,
}

impl CellState {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            CellState::One
        } else {
            CellState::Zero
        }
    }

    fn index(self) -> usize {
        match self {
            CellState::Zero => 0,
            CellState::One => 1,
        }
    }
}

/// Lumped equivalent circuit of a packaged PIN diode.
///
/// Forward biased it is a series R-L; reverse biased a series C-L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeCircuitModel {
    pub on_resistance: f64,
    pub on_inductance: f64,
    pub off_capacitance: f64,
    pub off_inductance: f64,
}

impl Default for DiodeCircuitModel {
    /// SMP1345-079LF values: R = 2 Ω, L = 0.7 pH, C = 0.18 pF.
    fn default() -> Self {
        DiodeCircuitModel {
            on_resistance: 2.0,
            on_inductance: 0.7e-12,
            off_capacitance: 0.18e-12,
            off_inductance: 0.7e-12,
        }
    }
}

impl DiodeCircuitModel {
    pub fn new(
        on_resistance: f64,
        on_inductance: f64,
        off_capacitance: f64,
        off_inductance: f64,
    ) -> Result<Self> {
        if !(on_resistance > 0.0 && on_resistance.is_finite()) {
            return Err(Error::invalid("on_resistance", "must be positive"));
        }
        if !(on_inductance >= 0.0 && on_inductance.is_finite()) {
            return Err(Error::invalid("on_inductance", "must be non-negative"));
        }
        if !(off_inductance >= 0.0 && off_inductance.is_finite()) {
            return Err(Error::invalid("off_inductance", "must be non-negative"));
        }
        if !(off_capacitance > 0.0 && off_capacitance.is_finite()) {
            return Err(Error::invalid("off_capacitance", "must be positive"));
        }
        Ok(DiodeCircuitModel {
            on_resistance,
            on_inductance,
            off_capacitance,
            off_inductance,
        })
    }

    /// Series impedance (Ω) of the diode in `state` at `freq_hz`.
    pub fn impedance(&self, state: DiodeState, freq_hz: f64) -> Result<Complex64> {
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(Error::invalid("frequency", format!("must be positive, got {freq_hz}")));
        }
        let w = 2.0 * PI * freq_hz;
        Ok(match state {
            DiodeState::On => Complex64::new(self.on_resistance, w * self.on_inductance),
            DiodeState::Off => {
                Complex64::new(0.0, w * self.off_inductance - 1.0 / (w * self.off_capacitance))
            }
        })
    }

    /// Series resonance of the OFF-state branch (Hz).
    pub fn off_resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.off_inductance * self.off_capacitance).sqrt())
    }
}

/// Closed frequency interval (Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqBand {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl FreqBand {
    pub fn new(lo_hz: f64, hi_hz: f64) -> Result<Self> {
        if !(lo_hz >= 0.0 && hi_hz > lo_hz && hi_hz.is_finite()) {
            return Err(Error::invalid("band", format!("must satisfy 0 <= lo < hi, got [{lo_hz}, {hi_hz}]")));
        }
        Ok(FreqBand { lo_hz, hi_hz })
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo_hz && f <= self.hi_hz
    }
}

/// One S21 sample for both cell states.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct S21Row {
    pub freq_hz: f64,
    pub mag0_db: f64,
    pub phase0_deg: f64,
    pub mag1_db: f64,
    pub phase1_deg: f64,
}

/// Two-state S21 table with strictly increasing frequency.
///
/// Phases are unwrapped on construction, assuming adjacent rows differ by
/// less than 180°.
#[derive(Debug, Clone, PartialEq)]
pub struct S21Table {
    freqs: Vec<f64>,
    mag_db: [Vec<f64>; 2],
    phase_deg: [Vec<f64>; 2],
}

fn wrap_180(d: f64) -> f64 {
    let w = (d + 180.0).rem_euclid(360.0) - 180.0;
    if w == -180.0 {
        180.0
    } else {
        w
    }
}

fn unwrap_deg(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    for (i, &p) in raw.iter().enumerate() {
        if i == 0 {
            out.push(p);
        } else {
            let prev = out[i - 1];
            out.push(prev + wrap_180(p - raw[i - 1]));
        }
    }
    out
}

impl S21Table {
    pub fn from_rows(rows: &[S21Row]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid("s21 table", "needs at least 2 rows"));
        }
        for (i, r) in rows.iter().enumerate() {
            let vals = [r.freq_hz, r.mag0_db, r.phase0_deg, r.mag1_db, r.phase1_deg];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("s21 table", format!("row {i}: non-finite value")));
            }
            if r.freq_hz <= 0.0 {
                return Err(Error::invalid("s21 table", format!("row {i}: frequency must be positive")));
            }
            if r.mag0_db > 0.0 || r.mag1_db > 0.0 {
                return Err(Error::invalid("s21 table", format!("row {i}: magnitude above 0 dB")));
            }
            if i > 0 && r.freq_hz <= rows[i - 1].freq_hz {
                return Err(Error::invalid(
                    "s21 table",
                    format!("row {i}: frequencies must be strictly increasing"),
                ));
            }
        }
        let col = |f: fn(&S21Row) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        Ok(S21Table {
            freqs: col(|r| r.freq_hz),
            mag_db: [col(|r| r.mag0_db), col(|r| r.mag1_db)],
            phase_deg: [unwrap_deg(&col(|r| r.phase0_deg)), unwrap_deg(&col(|r| r.phase1_deg))],
        })
    }

    /// Parses the CSV format `freq_hz,mag0_db,phase0_deg,mag1_db,phase1_deg`
    /// (header required, `#` comment lines allowed). `source` names the input in errors.
    pub fn from_csv_str(text: &str, source: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(source, 1, e.to_string()))?
            .clone();
        let expected = ["freq_hz", "mag0_db", "phase0_deg", "mag1_db", "phase1_deg"];
        if headers.iter().collect::<Vec<_>>() != expected {
            let line = reader.position().line().max(1) as usize;
            return Err(Error::parse(
                source,
                line,
                format!("expected header `{}`", expected.join(",")),
            ));
        }
        let mut rows = Vec::new();
        for rec in reader.deserialize::<S21Row>() {
            let row = rec.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Error::parse(source, line, e.to_string())
            })?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_csv_str(&text, &path.display().to_string())
    }

    pub fn span(&self) -> FreqBand {
        FreqBand {
            lo_hz: self.freqs[0],
            hi_hz: *self.freqs.last().unwrap(),
        }
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Node magnitudes (dB) for `state`.
    pub fn magnitudes_db(&self, state: CellState) -> &[f64] {
        &self.mag_db[state.index()]
    }

    /// Interpolated `(magnitude dB, unwrapped phase deg)` at `freq_hz`.
    pub fn interpolate(&self, state: CellState, freq_hz: f64) -> Result<(f64, f64)> {
        let span = self.span();
        if !span.contains(freq_hz) {
            return Err(Error::FrequencyOutOfBand {
                freq_hz,
                lo_hz: span.lo_hz,
                hi_hz: span.hi_hz,
            });
        }
        let s = state.index();
        let f = &self.freqs;
        match f.binary_search_by(|probe| probe.total_cmp(&freq_hz)) {
            Ok(i) => Ok((self.mag_db[s][i], self.phase_deg[s][i])),
            Err(i) => {
                let (a, b) = (i - 1, i);
                let t = (freq_hz - f[a]) / (f[b] - f[a]);
                let lerp = |v: &[f64]| v[a] + t * (v[b] - v[a]);
                Ok((lerp(&self.mag_db[s]), lerp(&self.phase_deg[s])))
            }
        }
    }
}

/// Magnitude response of the circuit-informed cell model.
///
/// Transmitted power follows a raised-cosine window in frequency, peaking at
/// `peak_hz` with loss `peak_loss_db` and falling to `edge_loss_db` exactly at
/// `band_lo_hz` and `band_hi_hz`. The two sides of the peak are scaled
/// independently so the peak need not sit mid-band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitResponse {
    pub peak_hz: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    pub peak_loss_db: f64,
    pub edge_loss_db: f64,
}

impl Default for CircuitResponse {
    fn default() -> Self {
        CircuitResponse {
            peak_hz: 5.8e9,
            band_lo_hz: 5.4e9,
            band_hi_hz: 6.6e9,
            peak_loss_db: 0.5,
            edge_loss_db: 3.0,
        }
    }
}

impl CircuitResponse {
    fn validate(&self) -> Result<()> {
        if !(self.band_lo_hz > 0.0 && self.band_lo_hz < self.peak_hz && self.peak_hz < self.band_hi_hz) {
            return Err(Error::invalid("circuit band", "must satisfy 0 < band_lo < peak < band_hi"));
        }
        if !(self.peak_loss_db >= 0.0 && self.edge_loss_db > self.peak_loss_db) {
            return Err(Error::invalid("circuit loss", "must satisfy 0 <= peak_loss < edge_loss"));
        }
        Ok(())
    }

    // Half-width of the raised-cosine support in units of the peak-to-edge distance.
    fn support(&self) -> f64 {
        let edge_power = 10f64.powf(-(self.edge_loss_db - self.peak_loss_db) / 10.0);
        PI / (2.0 * edge_power - 1.0).acos()
    }

    /// Transmission magnitude (linear) at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64) -> f64 {
        let x = if freq_hz < self.peak_hz {
            (self.peak_hz - freq_hz) / (self.peak_hz - self.band_lo_hz)
        } else {
            (freq_hz - self.peak_hz) / (self.band_hi_hz - self.peak_hz)
        };
        let support = self.support();
        if x >= support {
            return 0.0;
        }
        let window = 0.5 * (1.0 + (PI * x / support).cos());
        10f64.powf(-self.peak_loss_db / 20.0) * window.sqrt()
    }
}

/// Which level the 3 dB bandwidth is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandReference {
    /// Both states above -3 dB.
    Absolute,
    /// Both states within 3 dB of the best magnitude found in the validity band.
    RelativeToMax,
}

/// Per-state complex transmission model of one unit cell.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitCellModel {
    Ideal {
        insertion_loss_db: f64,
        /// Declared band of validity; evaluation itself works at any positive frequency.
        band: FreqBand,
    },
    Circuit {
        diode: DiodeCircuitModel,
        response: CircuitResponse,
    },
    Tabulated(S21Table),
}

impl UnitCellModel {
    /// Ideal 1-bit cell with the given insertion loss and a 5.4–6.6 GHz declared band.
    pub fn ideal(insertion_loss_db: f64) -> Result<Self> {
        if !(insertion_loss_db >= 0.0 && insertion_loss_db.is_finite()) {
            return Err(Error::invalid("insertion_loss_db", "must be >= 0"));
        }
        Ok(UnitCellModel::Ideal {
            insertion_loss_db,
            band: FreqBand {
                lo_hz: 5.4e9,
                hi_hz: 6.6e9,
            },
        })
    }

    pub fn circuit(diode: DiodeCircuitModel, response: CircuitResponse) -> Result<Self> {
        response.validate()?;
        Ok(UnitCellModel::Circuit { diode, response })
    }

    pub fn tabulated(table: S21Table) -> Self {
        UnitCellModel::Tabulated(table)
    }

    /// Band over which the model is declared valid. Tabulated models refuse
    /// to evaluate outside it; the analytic models only use it for bandwidth.
    pub fn validity_band(&self) -> FreqBand {
        match self {
            UnitCellModel::Ideal { band, .. } => *band,
            UnitCellModel::Circuit { response, .. } => FreqBand {
                lo_hz: response.band_lo_hz,
                hi_hz: response.band_hi_hz,
            },
            UnitCellModel::Tabulated(t) => t.span(),
        }
    }

    fn check_freq(&self, freq_hz: f64) -> Result<()> {
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(Error::invalid("frequency", format!("must be positive, got {freq_hz}")));
        }
        Ok(())
    }

    /// `(magnitude dB, phase deg)` of `state` at `freq_hz`.
    pub fn response(&self, state: CellState, freq_hz: f64) -> Result<(f64, f64)> {
        self.check_freq(freq_hz)?;
        let phase = match state {
            CellState::Zero => 0.0,
            CellState::One => 180.0,
        };
        match self {
            UnitCellModel::Ideal {
                insertion_loss_db, ..
            } => Ok((-insertion_loss_db, phase)),
            UnitCellModel::Circuit { response, .. } => {
                Ok((20.0 * response.magnitude(freq_hz).log10(), phase))
            }
            UnitCellModel::Tabulated(t) => t.interpolate(state, freq_hz),
        }
    }

    /// Complex transmission coefficient of `state` at `freq_hz`.
    pub fn transmission(&self, state: CellState, freq_hz: f64) -> Result<Complex64> {
        self.check_freq(freq_hz)?;
        let sign = match state {
            CellState::Zero => 1.0,
            CellState::One => -1.0,
        };
        match self {
            UnitCellModel::Ideal {
                insertion_loss_db, ..
            } => Ok(Complex64::new(sign * 10f64.powf(-insertion_loss_db / 20.0), 0.0)),
            UnitCellModel::Circuit { response, .. } => {
                Ok(Complex64::new(sign * response.magnitude(freq_hz), 0.0))
            }
            UnitCellModel::Tabulated(t) => {
                let (mag_db, phase_deg) = t.interpolate(state, freq_hz)?;
                Ok(Complex64::from_polar(
                    10f64.powf(mag_db / 20.0),
                    phase_deg.to_radians(),
                ))
            }
        }
    }

    /// Insertion loss (dB, positive) of the reference state at `freq_hz`.
    pub fn insertion_loss_db(&self, freq_hz: f64) -> Result<f64> {
        Ok(-self.response(CellState::Zero, freq_hz)?.0)
    }

    /// Phase of state 1 minus state 0, reduced to [0, 360) degrees.
    pub fn state_phase_difference(&self, freq_hz: f64) -> Result<f64> {
        let (_, p0) = self.response(CellState::Zero, freq_hz)?;
        let (_, p1) = self.response(CellState::One, freq_hz)?;
        let d = (p1 - p0).rem_euclid(360.0);
        Ok(if d >= 360.0 { 0.0 } else { d })
    }

    /// Fractional 3 dB bandwidth around `f_center`.
    ///
    /// The band is the largest contiguous interval containing `f_center` on
    /// which both states stay at or above the threshold, clipped to the
    /// validity band. Table crossings are located exactly on the piecewise
    /// linear (dB) interpolant.
    pub fn three_db_bandwidth(&self, f_center: f64, reference: BandReference) -> Result<f64> {
        self.check_freq(f_center)?;
        let band = self.validity_band();
        if !band.contains(f_center) {
            return Err(Error::FrequencyOutOfBand {
                freq_hz: f_center,
                lo_hz: band.lo_hz,
                hi_hz: band.hi_hz,
            });
        }
        let max_db = match self {
            UnitCellModel::Ideal {
                insertion_loss_db, ..
            } => -insertion_loss_db,
            UnitCellModel::Circuit { response, .. } => -response.peak_loss_db,
            UnitCellModel::Tabulated(t) => t.mag_db[0]
                .iter()
                .chain(t.mag_db[1].iter())
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        };
        let threshold = match reference {
            BandReference::Absolute => -3.0,
            BandReference::RelativeToMax => max_db - 3.0,
        };
        let level = |f: f64| -> Result<f64> {
            let (a, _) = self.response(CellState::Zero, f)?;
            let (b, _) = self.response(CellState::One, f)?;
            Ok(a.min(b))
        };
        if level(f_center)? < threshold {
            return Err(Error::BelowThreshold {
                freq_hz: f_center,
                threshold_db: threshold,
            });
        }
        let (lo, hi) = match self {
            UnitCellModel::Ideal { .. } => (band.lo_hz, band.hi_hz),
            UnitCellModel::Circuit { .. } => (
                bisect_edge(&level, f_center, band.lo_hz * 0.5, threshold)?,
                bisect_edge(&level, f_center, band.hi_hz * 1.5, threshold)?,
            ),
            UnitCellModel::Tabulated(t) => table_edges(t, f_center, threshold)?,
        };
        Ok((hi - lo) / f_center)
    }
}

// Walks from `inside` toward `outside`; returns the last frequency at or above threshold.
fn bisect_edge(
    level: &dyn Fn(f64) -> Result<f64>,
    inside: f64,
    outside: f64,
    threshold: f64,
) -> Result<f64> {
    if level(outside)? >= threshold {
        return Ok(outside);
    }
    let (mut a, mut b) = (inside, outside);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if level(m)? >= threshold {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() < 1e-6 {
            break;
        }
    }
    Ok(a)
}

fn table_edges(t: &S21Table, f_center: f64, threshold: f64) -> Result<(f64, f64)> {
    let f = &t.freqs;
    let n = f.len();
    // Segment index k covers [f[k], f[k+1]].
    let seg = match f.binary_search_by(|p| p.total_cmp(&f_center)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    };
    // Crossing where min over states first drops below threshold inside [a, b],
    // scanning from `from` (an endpoint) toward the other.
    let crossing = |a: usize, b: usize, from_a: bool| -> Option<f64> {
        let (s, e) = if from_a { (a, b) } else { (b, a) };
        let mut best: Option<f64> = None;
        for m in &t.mag_db {
            let (vs, ve) = (m[s], m[e]);
            if ve < threshold {
                // vs >= threshold is guaranteed by the walk; solve the linear crossing.
                let u = if vs == ve { 0.0 } else { (vs - threshold) / (vs - ve) };
                let u = u.clamp(0.0, 1.0);
                let x = f[s] + u * (f[e] - f[s]);
                best = Some(match best {
                    None => x,
                    Some(y) if from_a => y.min(x),
                    Some(y) => y.max(x),
                });
            }
        }
        best
    };
    let node_ok = |i: usize| t.mag_db[0][i] >= threshold && t.mag_db[1][i] >= threshold;

    // Upward walk.
    let mut hi = f[n - 1];
    let mut k = seg;
    // First segment: start from f_center itself.
    let (c_mag0, _) = t.interpolate(CellState::Zero, f_center)?;
    let (c_mag1, _) = t.interpolate(CellState::One, f_center)?;
    let first_cross = |to: usize| -> Option<f64> {
        let mut best: Option<f64> = None;
        for (mc, m) in [(c_mag0, &t.mag_db[0]), (c_mag1, &t.mag_db[1])] {
            if m[to] < threshold {
                let u = (mc - threshold) / (mc - m[to]);
                let x = f_center + u.clamp(0.0, 1.0) * (f[to] - f_center);
                best = Some(match best {
                    None => x,
                    Some(y) if to > seg => y.min(x),
                    Some(y) => y.max(x),
                });
            }
        }
        best
    };
    if let Some(x) = first_cross(seg + 1) {
        hi = x;
    } else {
        k += 1;
        while k < n - 1 {
            debug_assert!(node_ok(k));
            if let Some(x) = crossing(k, k + 1, true) {
                hi = x;
                break;
            }
            k += 1;
        }
    }

    // Downward walk.
    let mut lo = f[0];
    if let Some(x) = first_cross(seg) {
        lo = x;
    } else {
        let mut k = seg;
        while k > 0 {
            if let Some(x) = crossing(k - 1, k, false) {
                lo = x;
                break;
            }
            k -= 1;
        }
    }
    Ok((lo, hi))
}
