//! Flat `key=value` run configuration.
//!
//! ```text
//! # 16x16 prototype
//! rows = 16
//! cols = 16
//! period_mm = 18
//! feed_distance_mm = 260
//! freq_ghz = 5.8
//! model = tabulated
//! s21 = data/s21_measured.csv
//! ```
//!
//! Relative `s21` paths in a file resolve against that file's directory.

use std::path::{Path, PathBuf};

use crate::cell::{CircuitResponse, DiodeCircuitModel, S21Table, UnitCellModel};
use crate::error::{Error, Result};
use crate::farfield::IlluminationModel;
use crate::geometry::ArrayLayout;

/// Ordered `key=value` pairs with the line each came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    source: String,
    entries: Vec<(String, String, usize)>,
}

impl KeyValues {
    /// Blank lines and `#` comments are skipped; duplicate keys are an error.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut entries: Vec<(String, String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, idx + 1, format!("expected key=value, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::parse(source, idx + 1, "empty key"));
            }
            if entries.iter().any(|(e, _, _)| e == k) {
                return Err(Error::parse(source, idx + 1, format!("field `{k}` given twice")));
            }
            entries.push((k.to_string(), v.to_string(), idx + 1));
        }
        Ok(KeyValues {
            source: source.to_string(),
            entries,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v, _)| (k.as_str(), v.as_str()))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _, _)| k == key).map(|(_, v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.iter().find(|(k, _, _)| k == key).map_or(0, |e| e.2)
    }

    fn field_error(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        Error::parse(self.source.clone(), self.line_of(key), format!("field `{key}`: {msg}"))
    }

    pub fn unknown_key(&self, key: &str) -> Error {
        self.field_error(key, "unknown key")
    }

    /// Value of `key` as a finite float.
    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key).ok_or_else(|| self.field_error(key, "missing"))?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.field_error(key, format!("`{v}` is not a finite number")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.get(key).ok_or_else(|| self.field_error(key, "missing"))?;
        v.parse::<usize>()
            .map_err(|_| self.field_error(key, format!("`{v}` is not a non-negative integer")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(self.field_error(key, format!("`{v}` is not a boolean"))),
            None => Err(self.field_error(key, "missing")),
        }
    }
}

/// Which unit-cell model to build.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Ideal,
    Circuit,
    Tabulated(PathBuf),
}

impl ModelChoice {
    pub fn parse(name: &str, s21: Option<PathBuf>) -> Result<Self> {
        match name {
            "ideal" => Ok(ModelChoice::Ideal),
            "circuit" => Ok(ModelChoice::Circuit),
            "tabulated" => s21
                .map(ModelChoice::Tabulated)
                .ok_or_else(|| Error::invalid("s21", "path is required for the tabulated model")),
            other => Err(Error::invalid(
                "model",
                format!("`{other}` is not one of ideal, circuit, tabulated"),
            )),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub freq_ghz: Option<f64>,
    pub out: Option<PathBuf>,
    pub model: Option<String>,
    pub s21: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub layout: ArrayLayout,
    pub model_choice: ModelChoice,
    pub model: UnitCellModel,
    pub illumination: IlluminationModel,
    pub freq_hz: f64,
    pub out_dir: PathBuf,
    /// Theta step of the principal-cut pattern grid (deg).
    pub theta_step_deg: f64,
}

const KEYS: &[&str] = &[
    "rows",
    "cols",
    "period_mm",
    "feed_distance_mm",
    "feed_offset_x_mm",
    "feed_offset_y_mm",
    "freq_ghz",
    "model",
    "s21",
    "ideal_insertion_loss_db",
    "feed_exponent",
    "element_exponent",
    "spherical_spreading",
    "feed_path_phase",
    "theta_step_deg",
    "out",
];

impl RunConfig {
    /// Builds a configuration from optional file contents plus overrides.
    /// `base_dir` anchors relative paths found in the file.
    pub fn from_key_values(kv: &KeyValues, base_dir: &Path, ov: &Overrides) -> Result<Self> {
        if let Some((k, _)) = kv.iter().find(|(k, _)| !KEYS.contains(k)) {
            return Err(kv.unknown_key(k));
        }
        let f = |key: &str, default: f64| -> Result<f64> {
            if kv.get(key).is_some() {
                kv.f64(key)
            } else {
                Ok(default)
            }
        };
        let u = |key: &str, default: usize| -> Result<usize> {
            if kv.get(key).is_some() {
                kv.usize(key)
            } else {
                Ok(default)
            }
        };
        let b = |key: &str, default: bool| -> Result<bool> {
            if kv.get(key).is_some() {
                kv.bool(key)
            } else {
                Ok(default)
            }
        };

        let layout = ArrayLayout::with_feed_offset(
            u("rows", 16)?,
            u("cols", 16)?,
            f("period_mm", 18.0)? / 1000.0,
            f("feed_distance_mm", 260.0)? / 1000.0,
            (f("feed_offset_x_mm", 0.0)? / 1000.0, f("feed_offset_y_mm", 0.0)? / 1000.0),
        )?;

        let defaults = IlluminationModel::default();
        let illumination = IlluminationModel {
            feed_exponent: f("feed_exponent", defaults.feed_exponent)?,
            element_exponent: f("element_exponent", defaults.element_exponent)?,
            spherical_spreading: b("spherical_spreading", defaults.spherical_spreading)?,
            feed_path_phase: b("feed_path_phase", defaults.feed_path_phase)?,
        };
        illumination.validate()?;

        let freq_hz = match ov.freq_ghz {
            Some(g) => g,
            None => f("freq_ghz", 5.8)?,
        } * 1e9;
        if !(freq_hz > 0.0 && freq_hz.is_finite()) {
            return Err(Error::invalid("freq_ghz", "must be positive"));
        }

        let s21 = match &ov.s21 {
            Some(p) => Some(p.clone()),
            None => kv.get("s21").map(|p| base_dir.join(p)),
        };
        let model_name = ov
            .model
            .clone()
            .or_else(|| kv.get("model").map(str::to_string))
            .unwrap_or_else(|| "ideal".to_string());
        let model_choice = ModelChoice::parse(&model_name, s21)?;
        let model = match &model_choice {
            ModelChoice::Ideal => UnitCellModel::ideal(f("ideal_insertion_loss_db", 0.0)?)?,
            ModelChoice::Circuit => UnitCellModel::circuit(DiodeCircuitModel::default(), CircuitResponse::default())?,
            ModelChoice::Tabulated(path) => UnitCellModel::tabulated(S21Table::from_path(path)?),
        };
        let band = model.validity_band();
        if !band.contains(freq_hz) {
            return Err(Error::FrequencyOutOfBand {
                freq_hz,
                lo_hz: band.lo_hz,
                hi_hz: band.hi_hz,
            });
        }

        let theta_step_deg = f("theta_step_deg", 0.5)?;
        if !(theta_step_deg > 0.0 && theta_step_deg <= 45.0) {
            return Err(Error::invalid("theta_step_deg", "must be in (0, 45]"));
        }

        let out_dir = match &ov.out {
            Some(p) => p.clone(),
            None => kv.get("out").map_or_else(|| PathBuf::from("ris-out"), |p| base_dir.join(p)),
        };

        Ok(RunConfig {
            layout,
            model_choice,
            model,
            illumination,
            freq_hz,
            out_dir,
            theta_step_deg,
        })
    }

    /// Loads `path` (if any) and applies overrides.
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<Self> {
        match path {
            Some(p) => {
                let kv = KeyValues::from_path(p)?;
                let base = p.parent().unwrap_or(Path::new("."));
                Self::from_key_values(&kv, base, ov)
            }
            None => Self::from_key_values(&KeyValues::default(), Path::new("."), ov),
        }
    }
}
