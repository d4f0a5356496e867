//! Loss models: spherical spreading, Thorp absorption and bottom reflection.
//!
//! All gains are amplitude ratios.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::scenario::BottomConfig;

/// Thorp absorption coefficient in dB/km for a frequency in kHz.
pub fn thorp_alpha(f_khz: f64) -> Result<f64> {
    if !(f_khz > 0.0) {
        return Err(Error::NonPositive {
            quantity: "frequency",
            value: f_khz,
        });
    }
    let f2 = f_khz * f_khz;
    Ok(0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003)
}

/// Absorption amplitude ratio over `d` metres at `f_khz`.
pub fn absorption_loss(d: f64, f_khz: f64) -> Result<f64> {
    if d < 0.0 {
        return Err(Error::NonPositive {
            quantity: "distance",
            value: d,
        });
    }
    Ok(10f64.powf(-d * thorp_alpha(f_khz)? / 20_000.0))
}

pub fn spreading_loss(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonPositive {
            quantity: "distance",
            value: d,
        });
    }
    Ok(1.0 / d)
}

/// Magnitude of the Rayleigh reflection coefficient of a fluid half-space.
///
/// Beyond the critical angle the coefficient has the form `(a - ib)/(a + ib)`
/// and its magnitude is exactly one.
pub fn bottom_reflection(aoi: f64, bottom: &BottomConfig, water_sound_speed: f64) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&aoi) {
        return Err(Error::AngleOutOfRange(aoi));
    }
    let ratio = water_sound_speed / bottom.sound_speed;
    let (sin, cos) = aoi.sin_cos();
    let radicand = ratio * ratio - sin * sin;
    if radicand < 0.0 {
        return Ok(1.0);
    }
    let m = bottom.density_ratio * cos;
    let root = radicand.sqrt();
    Ok(((m - root) / (m + root)).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathKind {
    Los,
    /// Downward arrival with this many bottom contacts.
    Da {
        bottom_bounces: u32,
    },
    /// Upward arrival with this many bottom contacts.
    Ua {
        bottom_bounces: u32,
    },
}

impl PathKind {
    fn bottom_bounces(self) -> u32 {
        match self {
            PathKind::Los => 0,
            PathKind::Da { bottom_bounces } | PathKind::Ua { bottom_bounces } => bottom_bounces,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub spreading: f64,
    pub absorption: f64,
    /// Reflection coefficient raised to the number of bottom contacts.
    pub bottom_reflection: f64,
    pub total: f64,
}

/// Composite amplitude gain of one path at absolute frequency `f_hz`.
///
/// `aoi` is required for reflected paths and ignored for the direct path.
pub fn path_gain(
    kind: PathKind,
    d: f64,
    f_hz: f64,
    aoi: Option<f64>,
    bottom: &BottomConfig,
    water_sound_speed: f64,
) -> Result<LossBreakdown> {
    let spreading = spreading_loss(d)?;
    let absorption = absorption_loss(d, f_hz / 1000.0)?;
    let bounces = kind.bottom_bounces();
    let bottom_reflection = if bounces == 0 {
        1.0
    } else {
        let aoi = aoi.ok_or_else(|| Error::InvalidPath("reflected path needs an angle of incidence".into()))?;
        bottom_reflection(aoi, bottom, water_sound_speed)?.powi(bounces as i32)
    };
    Ok(LossBreakdown {
        spreading,
        absorption,
        bottom_reflection,
        total: spreading * absorption * bottom_reflection,
    })
}
