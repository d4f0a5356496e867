//! Named experiment set-ups.
//!
//! Each preset is a complete [`ScenarioConfig`] plus the statistic it is
//! meant to produce. Multi-curve experiments expand into several labelled
//! scenario variants.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::scenario::{
    uniform_grid, BottomConfig, ClusterConfig, DriftConfig, GeometryConfig, IntentionalMotion, PowerConfig,
    ScenarioConfig, SignalConfig, SurfaceMotionConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig3,
    Fig4Time,
    Fig4Freq,
    Fig5,
    Table1,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig3,
        Preset::Fig4Time,
        Preset::Fig4Freq,
        Preset::Fig5,
        Preset::Table1,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4Time => "fig4-time",
            Preset::Fig4Freq => "fig4-freq",
            Preset::Fig5 => "fig5",
            Preset::Table1 => "table1",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Longest temporal lag of the fig3 curves.
pub const FIG3_MAX_LAG: f64 = 0.1;
pub const FIG3_LAG_STEP: f64 = 0.002;
/// Longest temporal lag of the fig4 curves.
pub const FIG4_MAX_LAG: f64 = 0.3;
pub const FIG4_LAG_STEP: f64 = 0.005;
pub const FIG4_ANCHORS: [f64; 3] = [0.0, 5.0, 10.0];
pub const FIG5_ANCHORS: [f64; 2] = [0.0, 5.0];
pub const CARRIERS: [f64; 2] = [15_000.0, 100_000.0];

/// Common water column, spreads and bottom of the simulated scenarios.
fn baseline() -> ScenarioConfig {
    ScenarioConfig {
        geometry: GeometryConfig {
            horizontal_distance: 2000.0,
            water_depth: 100.0,
            tx_height: 50.0,
            rx_height: 80.0,
            sound_speed: 1500.0,
        },
        motion: IntentionalMotion::default(),
        drift: DriftConfig {
            v_min: 0.0,
            v_max: 0.0,
            change_freq: 1.0,
        },
        surface: SurfaceMotionConfig {
            amplitude: 0.0,
            freq: 0.0,
            travel_angle: FRAC_PI_2,
        },
        clusters: ClusterConfig {
            max_surface_bounces: 2,
            max_bottom_bounces: 2,
            rays_per_path: 50,
            sigma_phi_surface: 0.015,
            sigma_phi_bottom: 0.015,
            sigma_ds: 0.001,
        },
        power: PowerConfig {
            rice_k: 1.0,
            eta_da: 0.5,
            eta_ua: 0.5,
        },
        bottom: BottomConfig {
            density_ratio: 1.5,
            sound_speed: 1600.0,
        },
        signal: SignalConfig {
            carrier_freq: 15_000.0,
            freq_grid: vec![0.0],
            time_grid: vec![0.0],
        },
        master_seed: 1,
        mc_realizations: 500,
    }
}

fn lag_grid(max_lag: f64, step: f64, end: f64) -> Vec<f64> {
    let count = ((end + max_lag) / step).round() as usize + 1;
    uniform_grid(-max_lag, step, count)
}

fn fig4_motion() -> IntentionalMotion {
    IntentionalMotion {
        tx_speed: 10.0,
        tx_angle: 0.0,
        rx_speed: 5.0,
        rx_angle: -PI,
    }
}

/// Full parameter set of a preset.
pub fn preset_scenario(preset: Preset) -> ScenarioConfig {
    let mut cfg = baseline();
    match preset {
        Preset::Custom => {
            cfg.drift = DriftConfig {
                v_min: 0.1,
                v_max: 0.12,
                change_freq: 1.0,
            };
            cfg.surface.amplitude = 1.0;
            cfg.surface.freq = 0.5;
            cfg.signal.freq_grid = vec![0.0, 500.0, 1000.0];
            cfg.signal.time_grid = uniform_grid(0.0, 0.01, 11);
        }
        Preset::Fig3 => {
            cfg.power.rice_k = 5.0;
            cfg.motion = IntentionalMotion {
                tx_speed: 1.0,
                tx_angle: 0.0,
                rx_speed: 1.0,
                rx_angle: -FRAC_PI_2,
            };
            cfg.drift = DriftConfig {
                v_min: 0.1,
                v_max: 0.12,
                change_freq: 1.0,
            };
            cfg.surface.amplitude = 1.0;
            cfg.surface.freq = 0.5;
            cfg.signal.time_grid = lag_grid(FIG3_MAX_LAG, FIG3_LAG_STEP, 0.0);
        }
        Preset::Fig4Time | Preset::Fig4Freq => {
            cfg.power.rice_k = 0.0;
            cfg.motion = fig4_motion();
            let end = if preset == Preset::Fig4Time {
                FIG4_ANCHORS[2]
            } else {
                0.0
            };
            cfg.signal.time_grid = lag_grid(FIG4_MAX_LAG, FIG4_LAG_STEP, end);
        }
        Preset::Fig5 => {
            cfg.power.rice_k = 1.0;
            cfg.motion = fig4_motion();
            cfg.signal.time_grid = FIG5_ANCHORS.to_vec();
        }
        Preset::Table1 => {
            cfg.geometry = GeometryConfig {
                horizontal_distance: 1500.0,
                water_depth: 80.0,
                tx_height: 34.5,
                rx_height: 36.0,
                sound_speed: 1440.0,
            };
            cfg.surface = SurfaceMotionConfig {
                amplitude: 2.0,
                freq: 0.1,
                travel_angle: FRAC_PI_2,
            };
            cfg.clusters.max_surface_bounces = 1;
            cfg.clusters.max_bottom_bounces = 1;
            cfg.clusters.sigma_phi_surface = 0.02317;
            cfg.clusters.sigma_phi_bottom = 0.02317;
            cfg.power.rice_k = 1.44;
            cfg.bottom.sound_speed = 1.11 * 1440.0;
            cfg.signal.carrier_freq = 17_000.0;
        }
    }
    cfg
}

/// One labelled curve of a multi-curve experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub scenario: ScenarioConfig,
    /// Instant at which the statistic is evaluated.
    pub anchor_time: f64,
}

/// What a preset computes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    /// Temporal autocorrelation over `0..=max_lag`.
    Acf { max_lag: f64, lag_step: f64 },
    /// Cluster-level power delay profile.
    Pdp,
    /// Ensemble delay statistics of the cluster-level profile.
    DelayStats,
    /// Channel transfer function over the scenario grids.
    Ctf,
}

pub fn preset_statistic(preset: Preset) -> Statistic {
    match preset {
        Preset::Fig3 => Statistic::Acf {
            max_lag: FIG3_MAX_LAG,
            lag_step: FIG3_LAG_STEP,
        },
        Preset::Fig4Time | Preset::Fig4Freq => Statistic::Acf {
            max_lag: FIG4_MAX_LAG,
            lag_step: FIG4_LAG_STEP,
        },
        Preset::Fig5 => Statistic::Pdp,
        Preset::Table1 => Statistic::DelayStats,
        Preset::Custom => Statistic::Ctf,
    }
}

/// Expands a preset into its labelled curves, starting from `base`.
///
/// `base` is normally [`preset_scenario`] of the same preset, possibly with
/// user overrides applied.
pub fn preset_curves(preset: Preset, base: &ScenarioConfig) -> Vec<Curve> {
    let curve = |label: String, scenario: ScenarioConfig, anchor_time: f64| Curve {
        label,
        scenario,
        anchor_time,
    };
    match preset {
        Preset::Fig3 => {
            let mut out = Vec::new();
            for k in [base.power.rice_k, 0.0] {
                for a in [base.surface.amplitude, 2.0 * base.surface.amplitude] {
                    let mut s = base.clone();
                    s.power.rice_k = k;
                    s.surface.amplitude = a;
                    out.push(curve(format!("K={k} A={a}"), s, 0.0));
                }
            }
            out
        }
        Preset::Fig4Time => FIG4_ANCHORS
            .iter()
            .map(|&t| curve(format!("t={t}"), base.clone(), t))
            .collect(),
        Preset::Fig4Freq => CARRIERS
            .iter()
            .map(|&fc| {
                let mut s = base.clone();
                s.signal.carrier_freq = fc;
                curve(format!("fc={fc}"), s, 0.0)
            })
            .collect(),
        Preset::Fig5 => {
            let mut out = Vec::new();
            for &fc in &CARRIERS {
                for &t in &FIG5_ANCHORS {
                    let mut s = base.clone();
                    s.signal.carrier_freq = fc;
                    out.push(curve(format!("fc={fc} t={t}"), s, t));
                }
            }
            out
        }
        Preset::Table1 | Preset::Custom => {
            vec![curve(preset.name().to_string(), base.clone(), base.signal.time_grid[0])]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::validate;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert!(matches!("fig6".parse::<Preset>(), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn every_preset_validates_and_serializes() {
        for p in Preset::ALL {
            let cfg = preset_scenario(p);
            let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg, "{p}");
            validate(cfg.clone()).unwrap_or_else(|e| panic!("{p}: {e}"));
            for c in preset_curves(p, &cfg) {
                validate(c.scenario).unwrap();
            }
        }
    }

    #[test]
    fn fig3_parameters() {
        let c = preset_scenario(Preset::Fig3);
        assert_eq!(c.power.rice_k, 5.0);
        assert_eq!((c.motion.tx_speed, c.motion.rx_speed), (1.0, 1.0));
        assert_eq!(c.motion.tx_angle, 0.0);
        assert_eq!(c.motion.rx_angle, -FRAC_PI_2);
        assert_eq!((c.drift.v_min, c.drift.v_max), (0.1, 0.12));
        assert_eq!(c.surface.freq, 0.5);
        assert_eq!(c.signal.carrier_freq, 15_000.0);
        assert_eq!(c.signal.time_grid[0], -FIG3_MAX_LAG);
        assert!(c.signal.time_grid.last().unwrap().abs() < 1e-12);
    }

    #[test]
    fn fig5_parameters() {
        let c = preset_scenario(Preset::Fig5);
        assert_eq!(c.power.rice_k, 1.0);
        assert_eq!((c.motion.tx_speed, c.motion.rx_speed), (10.0, 5.0));
        assert_eq!((c.drift.v_min, c.drift.v_max), (0.0, 0.0));
        assert_eq!((c.surface.amplitude, c.surface.freq), (0.0, 0.0));
    }

    #[test]
    fn table1_parameters() {
        let c = preset_scenario(Preset::Table1);
        assert_eq!((c.clusters.max_surface_bounces, c.clusters.max_bottom_bounces), (1, 1));
        assert_eq!(c.power.rice_k, 1.44);
        assert_eq!((c.power.eta_da, c.power.eta_ua), (0.5, 0.5));
        assert_eq!(c.clusters.sigma_phi_surface, 0.02317);
        assert_eq!(c.geometry.horizontal_distance, 1500.0);
        assert_eq!(c.geometry.water_depth, 80.0);
        assert_eq!(c.signal.carrier_freq, 17_000.0);
        assert!((c.bottom.sound_speed / c.geometry.sound_speed - 1.11).abs() < 1e-12);
        assert_eq!(c.surface.amplitude, 2.0);
    }

    #[test]
    fn fig4_grid_covers_all_anchors() {
        let c = preset_scenario(Preset::Fig4Time);
        let last = *c.signal.time_grid.last().unwrap();
        assert!((last - 10.0).abs() < 1e-9);
        assert_eq!(preset_curves(Preset::Fig4Time, &c).len(), 3);
        assert_eq!(preset_curves(Preset::Fig3, &preset_scenario(Preset::Fig3)).len(), 4);
        assert_eq!(preset_curves(Preset::Fig5, &preset_scenario(Preset::Fig5)).len(), 4);
    }
}
