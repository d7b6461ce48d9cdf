//! Bias-line control frames for the 16×16 surface.
//!
//! The 256 bias lines leave the board on eight 34-pin connectors. Connector
//! `k` carries rows `2k` and `2k + 1`; pin `p` (1-based) drives element
//! `(2k + (p-1)/16, (p-1) % 16)`. Pins 33 and 34 are reserved and held low.
//! This pinout is a convention of this crate, not a hardware pinout.
//!
//! Text form, one line per connector, the 34 pins packed MSB-first into five
//! octets (the six trailing pad bits are zero):
//!
//! ```text
//! C0: 80 00 00 00 00
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::cell::DiodeState;
use crate::codebook::CodeMatrix;
use crate::error::{Error, Result};

pub const CONNECTORS: usize = 8;
pub const PINS_PER_CONNECTOR: usize = 34;
pub const PAYLOAD_PINS: usize = 32;
pub const FRAME_ROWS: usize = 16;
pub const FRAME_COLS: usize = 16;
const LINE_OCTETS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ControlFrame {
    pins: [[bool; PINS_PER_CONNECTOR]; CONNECTORS],
}

impl Default for ControlFrame {
    fn default() -> Self {
        ControlFrame {
            pins: [[false; PINS_PER_CONNECTOR]; CONNECTORS],
        }
    }
}

/// Connector and 1-based pin driving element `(row, col)`.
pub fn pin_for(row: usize, col: usize) -> (usize, usize) {
    (row / 2, (row % 2) * FRAME_COLS + col + 1)
}

/// Element driven by a payload pin.
pub fn element_for(connector: usize, pin: usize) -> (usize, usize) {
    (2 * connector + (pin - 1) / FRAME_COLS, (pin - 1) % FRAME_COLS)
}

/// Drive for diode #1 and diode #2 of a cell: bit 0 turns #2 on, bit 1 turns #1 on.
pub fn diode_states(bit: bool) -> (DiodeState, DiodeState) {
    if bit {
        (DiodeState::On, DiodeState::Off)
    } else {
        (DiodeState::Off, DiodeState::On)
    }
}

impl ControlFrame {
    /// Pin state; `pin` is 1-based.
    pub fn pin(&self, connector: usize, pin: usize) -> Result<bool> {
        Self::check(connector, pin)?;
        Ok(self.pins[connector][pin - 1])
    }

    /// Sets any pin, reserved ones included, so malformed frames can be built.
    pub fn set_pin(&mut self, connector: usize, pin: usize, high: bool) -> Result<()> {
        Self::check(connector, pin)?;
        self.pins[connector][pin - 1] = high;
        Ok(())
    }

    fn check(connector: usize, pin: usize) -> Result<()> {
        if connector >= CONNECTORS {
            return Err(Error::invalid("connector", format!("out of range: {connector} not in 0..{CONNECTORS}")));
        }
        if !(1..=PINS_PER_CONNECTOR).contains(&pin) {
            return Err(Error::invalid("pin", format!("out of range: {pin} not in 1..={PINS_PER_CONNECTOR}")));
        }
        Ok(())
    }

    pub fn reserved_pins_low(&self) -> bool {
        self.pins.iter().all(|c| !c[PAYLOAD_PINS..].iter().any(|&p| p))
    }

    /// The 256 payload bits in wire order: connector 0 first, pin 1 first.
    pub fn payload_bits(&self) -> impl Iterator<Item = bool> + '_ {
        self.pins.iter().flat_map(|c| c[..PAYLOAD_PINS].iter().copied())
    }

    /// Payload packed MSB-first into 32 octets.
    pub fn to_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, bit) in self.payload_bits().enumerate() {
            if bit {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Self {
        let mut frame = ControlFrame::default();
        for i in 0..CONNECTORS * PAYLOAD_PINS {
            frame.pins[i / PAYLOAD_PINS][i % PAYLOAD_PINS] = bytes[i / 8] & (0x80 >> (i % 8)) != 0;
        }
        frame
    }

    /// Diode drive for every element, row-major: 512 states.
    pub fn diode_drive(&self) -> Result<Vec<(DiodeState, DiodeState)>> {
        Ok(decompile(self)?.bits().iter().map(|&b| diode_states(b)).collect())
    }

    /// Payload-pin Hamming distance.
    pub fn hamming_distance(&self, other: &ControlFrame) -> usize {
        self.payload_bits().zip(other.payload_bits()).filter(|(a, b)| a != b).count()
    }

    /// Parses the text form, reporting the line and field of the first error.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut frame = ControlFrame::default();
        let mut seen = [false; CONNECTORS];
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::parse(source, line_no, msg);
            let (label, rest) = line
                .split_once(':')
                .ok_or_else(|| err("expected `C<k>: <5 hex octets>`".into()))?;
            let k: usize = label
                .strip_prefix('C')
                .and_then(|d| d.parse().ok())
                .filter(|&k| k < CONNECTORS)
                .ok_or_else(|| err(format!("bad connector label `{label}`")))?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(err(format!("connector C{k} given twice")));
            }
            let octets: Vec<&str> = rest.split_whitespace().collect();
            if octets.len() != LINE_OCTETS {
                return Err(err(format!("C{k}: expected {LINE_OCTETS} octets, found {}", octets.len())));
            }
            let mut word: u64 = 0;
            for (j, o) in octets.iter().enumerate() {
                if o.len() != 2 {
                    return Err(err(format!("C{k}: octet {} `{o}` is not two hex digits", j + 1)));
                }
                let b = u8::from_str_radix(o, 16)
                    .map_err(|_| err(format!("C{k}: octet {} `{o}` is not hex", j + 1)))?;
                word = (word << 8) | b as u64;
            }
            let pad = 8 * LINE_OCTETS - PINS_PER_CONNECTOR;
            if word & ((1 << pad) - 1) != 0 {
                return Err(err(format!("C{k}: padding bits after pin {PINS_PER_CONNECTOR} must be zero")));
            }
            for p in 0..PINS_PER_CONNECTOR {
                frame.pins[k][p] = word >> (8 * LINE_OCTETS - 1 - p) & 1 == 1;
            }
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::parse(source, text.lines().count(), format!("missing connector C{k}")));
        }
        Ok(frame)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, &path.display().to_string())
    }
}

impl fmt::Display for ControlFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, pins) in self.pins.iter().enumerate() {
            let word = pins
                .iter()
                .enumerate()
                .fold(0u64, |w, (p, &on)| w | ((on as u64) << (8 * LINE_OCTETS - 1 - p)));
            write!(f, "C{k}:")?;
            for j in (0..LINE_OCTETS).rev() {
                write!(f, " {:02X}", (word >> (8 * j)) & 0xFF)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for ControlFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, "<frame>")
    }
}

pub fn compile(code: &CodeMatrix) -> Result<ControlFrame> {
    if code.rows() != FRAME_ROWS || code.cols() != FRAME_COLS {
        return Err(Error::DimensionMismatch {
            expected_rows: FRAME_ROWS,
            expected_cols: FRAME_COLS,
            rows: code.rows(),
            cols: code.cols(),
        });
    }
    let mut frame = ControlFrame::default();
    for r in 0..FRAME_ROWS {
        for c in 0..FRAME_COLS {
            let (k, p) = pin_for(r, c);
            frame.pins[k][p - 1] = code.get(r, c);
        }
    }
    Ok(frame)
}

pub fn decompile(frame: &ControlFrame) -> Result<CodeMatrix> {
    for (k, pins) in frame.pins.iter().enumerate() {
        if let Some(p) = pins[PAYLOAD_PINS..].iter().position(|&on| on) {
            return Err(Error::MalformedFrame(format!(
                "reserved pin {} on connector C{k} is high",
                PAYLOAD_PINS + p + 1
            )));
        }
    }
    Ok(CodeMatrix::from_fn(FRAME_ROWS, FRAME_COLS, |r, c| {
        let (k, p) = pin_for(r, c);
        frame.pins[k][p - 1]
    }))
}
