//! Through-wall link budget with and without the surface.
//!
//! Without the surface the receiver sees the transmitter through the wall:
//!
//! ```text
//! P = Pt + Gt + Gr - FSPL(direct) - wall_loss
//! ```
//!
//! With the surface mounted on the wall the link is treated as two hops: the
//! aperture captures `A / (4π d1²)` of the transmitted EIRP, loses the cell
//! insertion loss, and re-radiates it with the surface directivity toward a
//! receiver `d2` away. The residual through-wall path is ignored.
//!
//! Transmit power, antenna gains and `d2` are rarely known for measured data,
//! so [`calibrate`] fits the wall loss and one additive system offset.

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::{wavelength, SPEED_OF_LIGHT};

/// Free-space path loss `20 log10(4π d f / c)` in dB.
pub fn fspl_db(distance_m: f64, freq_hz: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m * freq_hz / SPEED_OF_LIGHT).log10()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkScenario {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    /// Transmitter to surface (m).
    pub d1_m: f64,
    /// Surface to receiver (m).
    pub d2_m: f64,
    /// Transmitter to receiver through the wall (m).
    pub direct_distance_m: f64,
    pub wall_loss_db: f64,
    pub freq_hz: f64,
    pub ris_directivity_dbi: f64,
    pub ris_insertion_loss_db: f64,
    pub ris_aperture_area_m2: f64,
    /// Additive constant applied to both predictions (fitted by [`calibrate`]).
    pub system_offset_db: f64,
}

impl LinkScenario {
    /// Office/corridor geometry around the 16×16 prototype at 5.8 GHz:
    /// 0 dBm into 6 dBi antennas, surface 0.5 m from the transmitter and
    /// 1 m from the receiver, 10 dB prior for a 30 mm concrete wall.
    pub fn prototype(ris_directivity_dbi: f64, ris_insertion_loss_db: f64) -> Self {
        LinkScenario {
            tx_power_dbm: 0.0,
            tx_gain_dbi: 6.0,
            rx_gain_dbi: 6.0,
            d1_m: 0.5,
            d2_m: 1.0,
            direct_distance_m: 1.5,
            wall_loss_db: 10.0,
            freq_hz: 5.8e9,
            ris_directivity_dbi,
            ris_insertion_loss_db,
            ris_aperture_area_m2: 16.0 * 16.0 * 0.018 * 0.018,
            system_offset_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d1", self.d1_m),
            ("d2", self.d2_m),
            ("direct_distance", self.direct_distance_m),
            ("frequency", self.freq_hz),
            ("ris_aperture_area", self.ris_aperture_area_m2),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.wall_loss_db >= 0.0 && self.wall_loss_db.is_finite()) {
            return Err(Error::invalid("wall_loss", "must be >= 0"));
        }
        let finite = [
            ("tx_power", self.tx_power_dbm),
            ("tx_gain", self.tx_gain_dbi),
            ("rx_gain", self.rx_gain_dbi),
            ("ris_directivity", self.ris_directivity_dbi),
            ("ris_insertion_loss", self.ris_insertion_loss_db),
            ("system_offset", self.system_offset_db),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Same scenario with the transmitter moved to `d1`; Tx, surface and Rx stay collinear.
    pub fn with_d1(&self, d1_m: f64) -> Self {
        LinkScenario {
            d1_m,
            direct_distance_m: d1_m + self.d2_m,
            ..self.clone()
        }
    }

    /// Far-field distance `2 D² / λ` of the aperture, with `D` the diagonal of a square of the given area.
    pub fn far_field_distance_m(&self) -> f64 {
        let diag_sq = 2.0 * self.ris_aperture_area_m2;
        2.0 * diag_sq / wavelength(self.freq_hz)
    }

    /// Non-fatal: the two-hop model assumes both hops are in the aperture far field.
    pub fn near_field_warning(&self) -> Option<NearFieldWarning> {
        let limit = self.far_field_distance_m();
        (self.d1_m < limit || self.d2_m < limit).then_some(NearFieldWarning {
            d1_m: self.d1_m,
            d2_m: self.d2_m,
            far_field_m: limit,
        })
    }

    /// Parses a `key=value` scenario; keys missing from `text` keep the value in `base`.
    pub fn from_key_values(kv: &KeyValues, base: LinkScenario) -> Result<Self> {
        let mut s = base;
        let mut direct_given = false;
        for (key, _) in kv.iter() {
            let v = kv.f64(key)?;
            match key {
                "tx_power_dbm" => s.tx_power_dbm = v,
                "tx_gain_dbi" => s.tx_gain_dbi = v,
                "rx_gain_dbi" => s.rx_gain_dbi = v,
                "d1_m" => s.d1_m = v,
                "d2_m" => s.d2_m = v,
                "direct_distance_m" => {
                    s.direct_distance_m = v;
                    direct_given = true;
                }
                "wall_loss_db" => s.wall_loss_db = v,
                "freq_ghz" => s.freq_hz = v * 1e9,
                "ris_directivity_dbi" => s.ris_directivity_dbi = v,
                "ris_insertion_loss_db" => s.ris_insertion_loss_db = v,
                "ris_aperture_area_m2" => s.ris_aperture_area_m2 = v,
                "system_offset_db" => s.system_offset_db = v,
                other => return Err(kv.unknown_key(other)),
            }
        }
        if !direct_given {
            s.direct_distance_m = s.d1_m + s.d2_m;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn to_key_value(&self) -> String {
        format!(
            "tx_power_dbm={:.6}\ntx_gain_dbi={:.6}\nrx_gain_dbi={:.6}\nd1_m={:.6}\nd2_m={:.6}\ndirect_distance_m={:.6}\nwall_loss_db={:.6}\nfreq_ghz={:.6}\nris_directivity_dbi={:.6}\nris_insertion_loss_db={:.6}\nris_aperture_area_m2={:.6}\nsystem_offset_db={:.6}\n",
            self.tx_power_dbm,
            self.tx_gain_dbi,
            self.rx_gain_dbi,
            self.d1_m,
            self.d2_m,
            self.direct_distance_m,
            self.wall_loss_db,
            self.freq_hz / 1e9,
            self.ris_directivity_dbi,
            self.ris_insertion_loss_db,
            self.ris_aperture_area_m2,
            self.system_offset_db,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearFieldWarning {
    pub d1_m: f64,
    pub d2_m: f64,
    pub far_field_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub p_without_dbm: f64,
    pub p_with_dbm: f64,
    /// `p_with - p_without`, a ratio in dB.
    pub ris_gain_db: f64,
    pub near_field: Option<NearFieldWarning>,
}

impl LinkResult {
    pub fn to_key_value(&self) -> String {
        let mut out = format!(
            "p_without_ris_dbm={:.6}\np_with_ris_dbm={:.6}\nris_gain_db={:.6}\n",
            self.p_without_dbm, self.p_with_dbm, self.ris_gain_db
        );
        if let Some(w) = self.near_field {
            out.push_str(&format!("near_field_warning=d1 {:.3} m / d2 {:.3} m inside far-field distance {:.3} m\n", w.d1_m, w.d2_m, w.far_field_m));
        }
        out
    }
}

/// Received power (dBm) over the direct through-wall path.
pub fn received_power_direct(s: &LinkScenario) -> Result<f64> {
    s.validate()?;
    Ok(s.tx_power_dbm + s.tx_gain_dbi + s.rx_gain_dbi - fspl_db(s.direct_distance_m, s.freq_hz) - s.wall_loss_db
        + s.system_offset_db)
}

/// Received power (dBm) relayed by the surface.
pub fn received_power_via_ris(s: &LinkScenario) -> Result<f64> {
    s.validate()?;
    let lam = wavelength(s.freq_hz);
    let aperture_gain_db = 10.0 * (4.0 * PI * s.ris_aperture_area_m2 / (lam * lam)).log10();
    let collected = s.tx_power_dbm + s.tx_gain_dbi - fspl_db(s.d1_m, s.freq_hz) + aperture_gain_db
        - s.ris_insertion_loss_db;
    Ok(collected + s.ris_directivity_dbi - fspl_db(s.d2_m, s.freq_hz) + s.rx_gain_dbi + s.system_offset_db)
}

pub fn evaluate(s: &LinkScenario) -> Result<LinkResult> {
    let p_without_dbm = received_power_direct(s)?;
    let p_with_dbm = received_power_via_ris(s)?;
    Ok(LinkResult {
        p_without_dbm,
        p_with_dbm,
        ris_gain_db: p_with_dbm - p_without_dbm,
        near_field: s.near_field_warning(),
    })
}

/// One measured row: transmitter distance and received power with and without the surface.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Observation {
    pub d1_m: f64,
    pub p_without_dbm: f64,
    pub p_with_dbm: f64,
}

impl Observation {
    pub fn new(d1_m: f64, p_without_dbm: f64, p_with_dbm: f64) -> Self {
        Observation {
            d1_m,
            p_without_dbm,
            p_with_dbm,
        }
    }
}

/// Parses `d1_m,p_without_dbm,p_with_dbm` CSV (header required, `#` comments allowed).
pub fn parse_observations(text: &str, source: &str) -> Result<Vec<Observation>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(source, 1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["d1_m", "p_without_dbm", "p_with_dbm"] {
        return Err(Error::parse(source, 1, "expected header `d1_m,p_without_dbm,p_with_dbm`"));
    }
    reader
        .deserialize::<Observation>()
        .map(|r| {
            r.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Error::parse(source, line, e.to_string())
            })
        })
        .collect()
}

pub fn read_observations(path: impl AsRef<Path>) -> Result<Vec<Observation>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    parse_observations(&text, &path.display().to_string())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub d1_m: f64,
    /// Observed minus predicted, dB.
    pub without_db: f64,
    pub with_db: f64,
    pub predicted: LinkResultRow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkResultRow {
    pub p_without_dbm: f64,
    pub p_with_dbm: f64,
    pub ris_gain_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub scenario: LinkScenario,
    pub residuals: Vec<Residual>,
    /// Set when the unconstrained wall loss came out negative and was clamped to 0.
    pub wall_loss_clamped: bool,
}

impl Calibration {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals
            .iter()
            .flat_map(|r| [r.without_db.abs(), r.with_db.abs()])
            .fold(0.0, f64::max)
    }

    pub fn to_key_value(&self) -> String {
        let mut out = format!(
            "wall_loss_db={:.6}\nsystem_offset_db={:.6}\nwall_loss_clamped={}\nmax_abs_residual_db={:.6}\n",
            self.scenario.wall_loss_db,
            self.scenario.system_offset_db,
            self.wall_loss_clamped,
            self.max_abs_residual()
        );
        for (i, r) in self.residuals.iter().enumerate() {
            out.push_str(&format!(
                "obs{i}_d1_m={:.6}\nobs{i}_pred_without_dbm={:.6}\nobs{i}_pred_with_dbm={:.6}\nobs{i}_pred_gain_db={:.6}\nobs{i}_residual_without_db={:.6}\nobs{i}_residual_with_db={:.6}\n",
                r.d1_m, r.predicted.p_without_dbm, r.predicted.p_with_dbm, r.predicted.ris_gain_db, r.without_db, r.with_db
            ));
        }
        out
    }
}

/// Least-squares fit of the wall loss (and, if `fit_offset`, a common additive
/// offset) to observed powers, minimizing the squared dB error over both columns.
///
/// The template supplies every other parameter; each observation moves the
/// transmitter to its `d1` via [`LinkScenario::with_d1`]. The wall loss is
/// constrained to be non-negative.
pub fn calibrate(observations: &[Observation], template: &LinkScenario, fit_offset: bool) -> Result<Calibration> {
    if observations.is_empty() {
        return Err(Error::invalid("observations", "must contain at least one row"));
    }
    for o in observations {
        if !(o.d1_m > 0.0 && o.d1_m.is_finite() && o.p_with_dbm.is_finite() && o.p_without_dbm.is_finite()) {
            return Err(Error::invalid("observations", format!("contain an invalid row {o:?}")));
        }
    }
    if observations.len() > 1 && observations.iter().all(|o| o == &observations[0]) {
        return Err(Error::DegenerateFit(format!(
            "all {} observations are identical",
            observations.len()
        )));
    }
    let mut base = template.clone();
    base.wall_loss_db = 0.0;
    if fit_offset {
        base.system_offset_db = 0.0;
    }
    base.validate()?;

    // Observed minus model at zero wall loss / zero offset.
    let mut r_without = Vec::with_capacity(observations.len());
    let mut r_with = Vec::with_capacity(observations.len());
    for o in observations {
        let s = base.with_d1(o.d1_m);
        r_without.push(o.p_without_dbm - received_power_direct(&s)?);
        r_with.push(o.p_with_dbm - received_power_via_ris(&s)?);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    // Residuals: r_with - K and r_without - (K - W).
    let (mut offset, mut wall) = if fit_offset {
        let k = mean(&r_with);
        (k, k - mean(&r_without))
    } else {
        (0.0, -mean(&r_without))
    };
    let mut clamped = false;
    if wall < 0.0 {
        clamped = true;
        wall = 0.0;
        if fit_offset {
            offset = (r_with.iter().sum::<f64>() + r_without.iter().sum::<f64>()) / (2 * observations.len()) as f64;
        }
    }

    let mut scenario = base;
    scenario.wall_loss_db = wall;
    scenario.system_offset_db += offset;
    let residuals = observations
        .iter()
        .map(|o| {
            let r = evaluate(&scenario.with_d1(o.d1_m))?;
            Ok(Residual {
                d1_m: o.d1_m,
                without_db: o.p_without_dbm - r.p_without_dbm,
                with_db: o.p_with_dbm - r.p_with_dbm,
                predicted: LinkResultRow {
                    p_without_dbm: r.p_without_dbm,
                    p_with_dbm: r.p_with_dbm,
                    ris_gain_db: r.ris_gain_db,
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Calibration {
        scenario,
        residuals,
        wall_loss_clamped: clamped,
    })
}
