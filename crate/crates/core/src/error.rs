use thiserror::Error;

/// Everything that can go wrong while configuring or evaluating a channel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario: {field} = {value}: {reason}")]
    InvalidConfig {
        field: &'static str,
        value: String,
        reason: String,
    },

    #[error("failed to parse scenario: {0}")]
    Parse(String),

    #[error("time {t} s lies outside the simulated horizon [{start}, {end}] s")]
    OutsideHorizon { t: f64, start: f64, end: f64 },

    #[error("platform leaves the water column at t = {t} s: {what} = {value} m")]
    WaterColumnBreach { t: f64, what: &'static str, value: f64 },

    #[error("invalid path index: {0}")]
    InvalidPath(String),

    #[error("degenerate grazing geometry: {0}")]
    Grazing(String),

    #[error("{quantity} must be positive, got {value}")]
    NonPositive { quantity: &'static str, value: f64 },

    #[error("angle of incidence {0} rad outside [0, pi/2)")]
    AngleOutOfRange(f64),

    #[error("power delay profile carries no power")]
    ZeroPower,

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, value: impl ToString, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            value: value.to_string(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
