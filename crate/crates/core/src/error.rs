use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("element index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("frequency {freq_hz} Hz outside model band [{lo_hz}, {hi_hz}] Hz")]
    FrequencyOutOfBand { freq_hz: f64, lo_hz: f64, hi_hz: f64 },

    #[error("transmission at {freq_hz} Hz is already below the {threshold_db} dB threshold")]
    BelowThreshold { freq_hz: f64, threshold_db: f64 },

    #[error("dimension mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    DimensionMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("fast evaluation requires a uniform u-v grid")]
    NonUniformGrid,

    #[error("pattern is identically zero")]
    ZeroPattern,

    #[error("main lobe clipped by the edge of the angular grid")]
    MainLobeClipped,

    #[error("degenerate calibration: {0}")]
    DegenerateFit(String),

    #[error("malformed frame: {0}")]
    MalformedFrame(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
