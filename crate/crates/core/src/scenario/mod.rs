//! Scenario configuration, validation and the random-stream contract.
//!
//! All lengths are meters, times seconds, speeds m/s, frequencies Hz and
//! angles radians. The Rice factor and the power split are linear ratios.
//! Scenario files are JSON documents mirroring [`ScenarioConfig`]; unknown
//! keys are rejected.

mod rng;

pub use rng::{stream_for, RngStream};

use std::f64::consts::TAU;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Static water column and initial platform placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Horizontal Tx-Rx distance at t = 0.
    pub horizontal_distance: f64,
    pub water_depth: f64,
    /// Tx height above the seabed at t = 0.
    pub tx_height: f64,
    /// Rx height above the seabed at t = 0.
    pub rx_height: f64,
    /// Sound speed in water.
    pub sound_speed: f64,
}

/// Constant-velocity platform motion. Angles are measured from the
/// Tx-to-Rx horizontal axis, counter-clockwise towards the surface.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentionalMotion {
    pub tx_speed: f64,
    pub tx_angle: f64,
    pub rx_speed: f64,
    pub rx_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftConfig {
    pub v_min: f64,
    pub v_max: f64,
    /// Rate at which the drift velocity is redrawn.
    pub change_freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceMotionConfig {
    pub amplitude: f64,
    pub freq: f64,
    pub travel_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    /// Maximum number of surface contacts of downward-arrival paths.
    pub max_surface_bounces: u32,
    /// Maximum number of bottom contacts of upward-arrival paths.
    pub max_bottom_bounces: u32,
    pub rays_per_path: u32,
    pub sigma_phi_surface: f64,
    pub sigma_phi_bottom: f64,
    /// Log-normal spread of the middle segment of multi-bounce rays.
    pub sigma_ds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub rice_k: f64,
    pub eta_da: f64,
    pub eta_ua: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BottomConfig {
    /// Bottom-to-water density ratio.
    pub density_ratio: f64,
    /// Sound speed in the bottom sediment.
    pub sound_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub carrier_freq: f64,
    /// Baseband frequency offsets.
    pub freq_grid: Vec<f64>,
    /// Uniformly spaced evaluation instants.
    pub time_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub geometry: GeometryConfig,
    pub motion: IntentionalMotion,
    pub drift: DriftConfig,
    pub surface: SurfaceMotionConfig,
    pub clusters: ClusterConfig,
    pub power: PowerConfig,
    pub bottom: BottomConfig,
    pub signal: SignalConfig,
    pub master_seed: u64,
    pub mc_realizations: u32,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario config serializes")
    }
}

/// A scenario whose invariants have all been checked. Immutable.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedScenario(ScenarioConfig);

impl ValidatedScenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.0
    }

    pub fn into_inner(self) -> ScenarioConfig {
        self.0
    }

    /// First and last instant of the time grid.
    pub fn horizon(&self) -> (f64, f64) {
        let grid = &self.0.signal.time_grid;
        (grid[0], grid[grid.len() - 1])
    }

    /// Ratio of water to bottom sound speed.
    pub fn speed_ratio(&self) -> f64 {
        self.0.geometry.sound_speed / self.0.bottom.sound_speed
    }
}

impl Deref for ValidatedScenario {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.0
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn require(ok: bool, field: &'static str, value: f64, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(field, value, reason))
    }
}

fn finite(field: &'static str, value: f64) -> Result<()> {
    require(value.is_finite(), field, value, "must be finite")
}

/// Checks every invariant and normalizes angles into `[0, 2π)`.
///
/// The first violated invariant is reported with its field name and value.
pub fn validate(mut cfg: ScenarioConfig) -> Result<ValidatedScenario> {
    let g = &cfg.geometry;
    for (field, v) in [
        ("geometry.horizontal_distance", g.horizontal_distance),
        ("geometry.water_depth", g.water_depth),
        ("geometry.tx_height", g.tx_height),
        ("geometry.rx_height", g.rx_height),
        ("geometry.sound_speed", g.sound_speed),
    ] {
        finite(field, v)?;
    }
    require(
        g.water_depth > 0.0,
        "geometry.water_depth",
        g.water_depth,
        "water depth must be positive",
    )?;
    require(
        g.tx_height > 0.0 && g.tx_height < g.water_depth,
        "geometry.tx_height",
        g.tx_height,
        "Tx height must satisfy 0 < hT0 < hS",
    )?;
    require(
        g.rx_height > 0.0 && g.rx_height < g.water_depth,
        "geometry.rx_height",
        g.rx_height,
        "Rx height must satisfy 0 < hR0 < hS",
    )?;
    require(
        g.horizontal_distance > 0.0,
        "geometry.horizontal_distance",
        g.horizontal_distance,
        "horizontal distance must be positive",
    )?;
    require(
        g.sound_speed > 0.0,
        "geometry.sound_speed",
        g.sound_speed,
        "sound speed must be positive",
    )?;

    let m = &cfg.motion;
    for (field, v) in [
        ("motion.tx_speed", m.tx_speed),
        ("motion.tx_angle", m.tx_angle),
        ("motion.rx_speed", m.rx_speed),
        ("motion.rx_angle", m.rx_angle),
    ] {
        finite(field, v)?;
    }
    require(
        m.tx_speed >= 0.0,
        "motion.tx_speed",
        m.tx_speed,
        "speed must be non-negative",
    )?;
    require(
        m.rx_speed >= 0.0,
        "motion.rx_speed",
        m.rx_speed,
        "speed must be non-negative",
    )?;

    let d = &cfg.drift;
    finite("drift.v_min", d.v_min)?;
    finite("drift.v_max", d.v_max)?;
    finite("drift.change_freq", d.change_freq)?;
    require(
        d.v_min >= 0.0,
        "drift.v_min",
        d.v_min,
        "drift speeds must satisfy 0 <= v_min <= v_max",
    )?;
    require(
        d.v_max >= d.v_min,
        "drift.v_max",
        d.v_max,
        "drift speeds must satisfy 0 <= v_min <= v_max",
    )?;
    require(
        d.change_freq > 0.0,
        "drift.change_freq",
        d.change_freq,
        "change frequency must be positive",
    )?;

    let s = &cfg.surface;
    finite("surface.amplitude", s.amplitude)?;
    finite("surface.freq", s.freq)?;
    finite("surface.travel_angle", s.travel_angle)?;
    require(
        s.amplitude >= 0.0,
        "surface.amplitude",
        s.amplitude,
        "amplitude must be non-negative",
    )?;
    require(s.freq >= 0.0, "surface.freq", s.freq, "frequency must be non-negative")?;

    let c = &cfg.clusters;
    require(
        c.max_surface_bounces >= 1,
        "clusters.max_surface_bounces",
        c.max_surface_bounces as f64,
        "must be at least 1",
    )?;
    require(
        c.max_bottom_bounces >= 1,
        "clusters.max_bottom_bounces",
        c.max_bottom_bounces as f64,
        "must be at least 1",
    )?;
    require(
        c.rays_per_path >= 1,
        "clusters.rays_per_path",
        c.rays_per_path as f64,
        "must be at least 1",
    )?;
    for (field, v) in [
        ("clusters.sigma_phi_surface", c.sigma_phi_surface),
        ("clusters.sigma_phi_bottom", c.sigma_phi_bottom),
        ("clusters.sigma_ds", c.sigma_ds),
    ] {
        finite(field, v)?;
        require(v >= 0.0, field, v, "spread must be non-negative")?;
    }

    let p = &cfg.power;
    require(
        !p.rice_k.is_nan() && p.rice_k >= 0.0,
        "power.rice_k",
        p.rice_k,
        "Rice factor must be non-negative",
    )?;
    finite("power.eta_da", p.eta_da)?;
    finite("power.eta_ua", p.eta_ua)?;
    require(
        p.eta_da >= 0.0,
        "power.eta_da",
        p.eta_da,
        "power share must be non-negative",
    )?;
    require(
        p.eta_ua >= 0.0,
        "power.eta_ua",
        p.eta_ua,
        "power share must be non-negative",
    )?;
    require(
        (p.eta_da + p.eta_ua - 1.0).abs() <= 1e-12,
        "power.eta_da",
        p.eta_da + p.eta_ua,
        "etaDA+etaUA must equal 1",
    )?;

    let b = &cfg.bottom;
    finite("bottom.density_ratio", b.density_ratio)?;
    finite("bottom.sound_speed", b.sound_speed)?;
    require(
        b.density_ratio > 0.0,
        "bottom.density_ratio",
        b.density_ratio,
        "density ratio must be positive",
    )?;
    require(
        b.sound_speed > 0.0,
        "bottom.sound_speed",
        b.sound_speed,
        "bottom sound speed must be positive",
    )?;

    let sig = &cfg.signal;
    finite("signal.carrier_freq", sig.carrier_freq)?;
    require(
        sig.carrier_freq > 0.0,
        "signal.carrier_freq",
        sig.carrier_freq,
        "carrier must be positive",
    )?;
    require(
        !sig.freq_grid.is_empty(),
        "signal.freq_grid",
        0.0,
        "frequency grid must not be empty",
    )?;
    for &f in &sig.freq_grid {
        finite("signal.freq_grid", f)?;
        require(
            sig.carrier_freq + f > 0.0,
            "signal.freq_grid",
            f,
            "carrier plus offset must be positive",
        )?;
    }
    check_time_grid(&sig.time_grid)?;

    require(
        cfg.mc_realizations >= 1,
        "mc_realizations",
        cfg.mc_realizations as f64,
        "ensemble size must be at least 1",
    )?;

    cfg.motion.tx_angle = normalize_angle(cfg.motion.tx_angle);
    cfg.motion.rx_angle = normalize_angle(cfg.motion.rx_angle);
    cfg.surface.travel_angle = normalize_angle(cfg.surface.travel_angle);
    Ok(ValidatedScenario(cfg))
}

fn check_time_grid(grid: &[f64]) -> Result<()> {
    require(!grid.is_empty(), "signal.time_grid", 0.0, "time grid must not be empty")?;
    for &t in grid {
        finite("signal.time_grid", t)?;
    }
    if grid.len() < 2 {
        return Ok(());
    }
    let step = grid[1] - grid[0];
    require(
        step > 0.0,
        "signal.time_grid",
        grid[1],
        "time grid must be strictly increasing",
    )?;
    for (i, w) in grid.windows(2).enumerate() {
        let d = w[1] - w[0];
        require(
            d > 0.0,
            "signal.time_grid",
            w[1],
            "time grid must be strictly increasing",
        )?;
        // Grids are usually produced as start + i * step, so allow rounding
        // proportional to the magnitude of the instants.
        let tol = 1e-9 * step + 1e-12 * w[1].abs().max(w[0].abs());
        require(
            (d - step).abs() <= tol,
            "signal.time_grid",
            grid[i + 1],
            "time grid must have a constant step",
        )?;
    }
    Ok(())
}

/// Builds `count` uniformly spaced instants starting at `start`.
pub fn uniform_grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset_scenario, Preset};
    use std::f64::consts::PI;

    fn base() -> ScenarioConfig {
        preset_scenario(Preset::Custom)
    }

    #[test]
    fn baseline_defaults_accepted() {
        let cfg = base();
        assert_eq!(cfg.geometry.horizontal_distance, 2000.0);
        assert_eq!(cfg.geometry.water_depth, 100.0);
        assert_eq!(cfg.geometry.tx_height, 50.0);
        assert_eq!(cfg.geometry.rx_height, 80.0);
        assert_eq!(cfg.geometry.sound_speed, 1500.0);
        assert!(validate(cfg).is_ok());
    }

    #[test]
    fn tx_at_surface_rejected() {
        let mut cfg = base();
        cfg.geometry.tx_height = 0.0;
        let err = validate(cfg).unwrap_err();
        match &err {
            Error::InvalidConfig { field, value, reason } => {
                assert_eq!(*field, "geometry.tx_height");
                assert_eq!(value, "0");
                assert_eq!(reason, "Tx height must satisfy 0 < hT0 < hS");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_split_must_sum_to_one() {
        let mut cfg = base();
        cfg.power.eta_da = 0.3;
        cfg.power.eta_ua = 0.6;
        let err = validate(cfg).unwrap_err();
        assert!(err.to_string().contains("etaDA+etaUA must equal 1"), "{err}");
    }

    #[test]
    fn irregular_time_grid_rejected() {
        let mut cfg = base();
        cfg.signal.time_grid = vec![0.0, 1.0, 2.5];
        assert!(validate(cfg).is_err());
        let mut cfg = base();
        cfg.signal.time_grid = vec![0.0, 0.0];
        assert!(validate(cfg).is_err());
    }

    #[test]
    fn baseband_below_carrier_rejected() {
        let mut cfg = base();
        cfg.signal.freq_grid = vec![-cfg.signal.carrier_freq];
        assert!(validate(cfg).is_err());
    }

    #[test]
    fn infinite_rice_factor_allowed() {
        let mut cfg = base();
        cfg.power.rice_k = f64::INFINITY;
        assert!(validate(cfg).is_ok());
    }

    #[test]
    fn unknown_keys_are_errors() {
        let mut v: serde_json::Value = serde_json::from_str(&base().to_json()).unwrap();
        v["geometry"]["tilt"] = serde_json::json!(1.0);
        assert!(ScenarioConfig::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&base().to_json()).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(ScenarioConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn angles_normalized() {
        let mut cfg = base();
        cfg.motion.rx_angle = -PI / 2.0;
        let v = validate(cfg).unwrap();
        assert!((v.motion.rx_angle - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn uniform_grid_validates() {
        let mut cfg = base();
        cfg.signal.time_grid = uniform_grid(-0.1, 0.002, 51);
        assert!(validate(cfg).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn validation_idempotent(a in -50.0f64..50.0, b in -50.0f64..50.0, s in -50.0f64..50.0) {
                let mut cfg = base();
                cfg.motion.tx_angle = a;
                cfg.motion.rx_angle = b;
                cfg.surface.travel_angle = s;
                let once = validate(cfg).unwrap();
                let twice = validate(once.clone().into_inner()).unwrap();
                prop_assert_eq!(once, twice);
            }

            #[test]
            fn normalization_preserves_angle(a in -1e3f64..1e3) {
                let n = normalize_angle(a);
                prop_assert!((0.0..TAU).contains(&n));
                let d = (n - a) / TAU;
                prop_assert!((d - d.round()).abs() * TAU < 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
