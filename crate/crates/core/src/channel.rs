//! Channel realizations and the time-frequency transfer function.
//!
//! A realization freezes every random draw of one ensemble member: drift
//! paths, micro-ray angle offsets, surface phases and initial phases. It can
//! then be evaluated at any instant of the simulated horizon and any
//! frequency.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    enumerate_paths, evolve, los_distance, macro_ray, micro_ray_distances, sample_micro_ray_mb, sample_micro_ray_sb,
    ClusterGeometry, MicroRay, PathClass, PathIndex,
};
use crate::motion::{build_drift, DriftState};
use crate::propagation::{path_gain, PathKind};
use crate::scenario::{stream_for, ValidatedScenario};

/// Loss model applied when evaluating gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainModel {
    #[default]
    Physical,
    /// Every path gain forced to one; for normalization checks.
    Unit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub path: PathIndex,
    pub draws: MicroRay,
    /// Initial phase, `[0, 2π)`.
    pub initial_phase: f64,
}

/// All micro rays of one reflected path.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPath {
    pub index: PathIndex,
    pub rays: Vec<Ray>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    index: u64,
    master_seed: u64,
    drift_tx: DriftState,
    drift_rx: DriftState,
    subpaths: Vec<SubPath>,
    gain_model: GainModel,
}

/// Draws realization `index` of the scenario ensemble.
///
/// The result depends only on the scenario and `index`.
pub fn build_realization(scn: &ValidatedScenario, index: u64) -> Result<ChannelRealization> {
    let seed = scn.master_seed;
    let (start, end) = scn.horizon();
    let drift_tx = build_drift(&scn.drift, start, end - start, &mut stream_for(seed, index, "drift-tx"));
    let drift_rx = build_drift(&scn.drift, start, end - start, &mut stream_for(seed, index, "drift-rx"));

    let hs = scn.geometry.water_depth;
    let g = evolve(&scn.geometry, &scn.motion, start)?;
    let c = &scn.clusters;
    let mut subpaths = Vec::new();
    for idx in enumerate_paths(c.max_surface_bounces, c.max_bottom_bounces) {
        let cluster = macro_ray(&g, hs, idx)?;
        let mut rng = stream_for(seed, index, &format!("rays/{idx}"));
        let mut rays = Vec::with_capacity(c.rays_per_path as usize);
        for _ in 0..c.rays_per_path {
            let draws = if idx.is_single_bounce() {
                sample_micro_ray_sb(&cluster, &g, hs, c, &mut rng)?
            } else {
                sample_micro_ray_mb(&cluster, c, &mut rng)?
            };
            let initial_phase = rng.angle();
            rays.push(Ray {
                path: idx,
                draws,
                initial_phase,
            });
        }
        subpaths.push(SubPath { index: idx, rays });
    }
    Ok(ChannelRealization {
        index,
        master_seed: seed,
        drift_tx,
        drift_rx,
        subpaths,
        gain_model: GainModel::Physical,
    })
}

impl ChannelRealization {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn drift_tx(&self) -> &DriftState {
        &self.drift_tx
    }

    pub fn drift_rx(&self) -> &DriftState {
        &self.drift_rx
    }

    pub fn subpaths(&self) -> &[SubPath] {
        &self.subpaths
    }

    pub fn gain_model(&self) -> GainModel {
        self.gain_model
    }

    pub fn with_gain_model(mut self, model: GainModel) -> Self {
        self.gain_model = model;
        self
    }

    pub fn ray_count(&self) -> usize {
        self.subpaths.iter().map(|s| s.rays.len()).sum()
    }

    /// Delays and weights of every component at instant `t`.
    pub fn snapshot(&self, scn: &ValidatedScenario, t: f64) -> Result<Snapshot> {
        let (start, end) = scn.horizon();
        let slack = 1e-9 * (end - start).max(1.0);
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutsideHorizon { t, start, end });
        }
        let c = scn.geometry.sound_speed;
        let hs = scn.geometry.water_depth;
        let g = evolve(&scn.geometry, &scn.motion, t)?;
        let dtx = self.drift_tx.displacement(t)?;
        let drx = self.drift_rx.displacement(t)?;
        let k = scn.power.rice_k;
        let (los_weight, nlos_scale) = if k.is_infinite() {
            (1.0, 0.0)
        } else {
            ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
        };

        let los = los_distance(&g, dtx, drx);
        let mut clusters = Vec::with_capacity(self.subpaths.len() + 1);
        let mut components = Vec::with_capacity(self.ray_count() + 1);
        clusters.push(ClusterState {
            kind: PathKind::Los,
            label: "LoS".into(),
            distance: los,
            aoi: None,
            ray_count: 1,
            weight: los_weight,
        });
        components.push(Component {
            cluster: 0,
            ray: 0,
            delay: los / c,
            weight: los_weight,
            phase: 0.0,
        });

        let clu = &scn.clusters;
        for sub in &self.subpaths {
            let geo: ClusterGeometry = macro_ray(&g, hs, sub.index)?;
            let (kind, eta, limit) = match sub.index.class() {
                PathClass::Da => (
                    PathKind::Da {
                        bottom_bounces: sub.index.bottom_bounces(),
                    },
                    scn.power.eta_da,
                    clu.max_surface_bounces,
                ),
                PathClass::Ua => (
                    PathKind::Ua {
                        bottom_bounces: sub.index.bottom_bounces(),
                    },
                    scn.power.eta_ua,
                    clu.max_bottom_bounces,
                ),
            };
            let weight = nlos_scale * eta.sqrt() / (2.0 * limit as f64 * sub.rays.len() as f64).sqrt();
            let ci = clusters.len();
            clusters.push(ClusterState {
                kind,
                label: sub.index.to_string(),
                distance: geo.distance,
                aoi: Some(geo.aoi),
                ray_count: sub.rays.len(),
                weight,
            });
            for (n, ray) in sub.rays.iter().enumerate() {
                let m = micro_ray_distances(&ray.draws, &geo, &g, hs, dtx, drx, &scn.surface, t)?;
                components.push(Component {
                    cluster: ci,
                    ray: n,
                    delay: m.length() / c,
                    weight,
                    phase: ray.initial_phase,
                });
            }
        }
        Ok(Snapshot {
            time: t,
            carrier: scn.signal.carrier_freq,
            sound_speed: c,
            gain_model: self.gain_model,
            bottom: scn.bottom.clone(),
            clusters,
            components,
        })
    }
}

/// Per-cluster quantities shared by all rays of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub kind: PathKind,
    pub label: String,
    /// Length of the specular path, used for the gain.
    pub distance: f64,
    pub aoi: Option<f64>,
    pub ray_count: usize,
    /// Amplitude weight of each ray.
    pub weight: f64,
}

impl ClusterState {
    pub fn delay(&self, sound_speed: f64) -> f64 {
        self.distance / sound_speed
    }
}

/// One ray (or the direct path) at a fixed instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    /// Position in [`Snapshot::clusters`]; zero is the direct path.
    pub cluster: usize,
    pub ray: usize,
    pub delay: f64,
    pub weight: f64,
    pub phase: f64,
}

/// Channel geometry frozen at one instant; cheap to evaluate at many frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub carrier: f64,
    pub sound_speed: f64,
    pub gain_model: GainModel,
    bottom: crate::scenario::BottomConfig,
    pub clusters: Vec<ClusterState>,
    pub components: Vec<Component>,
}

/// One term of the transfer function.
#[derive(Debug, Clone, PartialEq)]
pub struct Tap {
    pub delay: f64,
    pub amplitude: Complex64,
    pub label: String,
}

impl Snapshot {
    /// Amplitude gain of every cluster at baseband offset `f`.
    pub fn cluster_gains(&self, f: f64) -> Result<Vec<f64>> {
        let fa = self.carrier + f;
        self.clusters
            .iter()
            .map(|cl| match self.gain_model {
                GainModel::Unit => Ok(1.0),
                GainModel::Physical => {
                    path_gain(cl.kind, cl.distance, fa, cl.aoi, &self.bottom, self.sound_speed).map(|l| l.total)
                }
            })
            .collect()
    }

    /// Weighted complex amplitude of each component at offset `f`, in component order.
    pub fn amplitudes(&self, f: f64) -> Result<Vec<Complex64>> {
        let gains = self.cluster_gains(f)?;
        let fa = self.carrier + f;
        Ok(self
            .components
            .iter()
            .map(|c| {
                let arg = c.phase - TAU * fa * c.delay;
                Complex64::from_polar(c.weight * gains[c.cluster], arg)
            })
            .collect())
    }

    /// Transfer function at offset `f`.
    pub fn ctf(&self, f: f64) -> Result<Complex64> {
        Ok(self
            .amplitudes(f)?
            .into_iter()
            .fold(Complex64::new(0.0, 0.0), |acc, a| acc + a))
    }

    /// Every component as a tap; their sum is [`Snapshot::ctf`].
    pub fn taps(&self, f: f64) -> Result<Vec<Tap>> {
        let amps = self.amplitudes(f)?;
        Ok(self
            .components
            .iter()
            .zip(amps)
            .map(|(c, amplitude)| Tap {
                delay: c.delay,
                amplitude,
                label: if c.cluster == 0 {
                    "LoS".to_string()
                } else {
                    format!("{}#{}", self.clusters[c.cluster].label, c.ray)
                },
            })
            .collect())
    }
}

/// Transfer function of one realization over the scenario grids.
#[derive(Debug, Clone, PartialEq)]
pub struct CtfFrame {
    pub realization: u64,
    pub carrier: f64,
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    /// Row-major, one row per instant.
    pub values: Vec<Complex64>,
}

impl CtfFrame {
    pub fn at(&self, ti: usize, fi: usize) -> Complex64 {
        self.values[ti * self.freqs.len() + fi]
    }
}

/// Evaluates `H(t, f)` over the scenario time and frequency grids.
///
/// Instants are evaluated in parallel; each value is computed independently
/// so the frame does not depend on the worker count.
pub fn evaluate_ctf(real: &ChannelRealization, scn: &ValidatedScenario) -> Result<CtfFrame> {
    let freqs = scn.signal.freq_grid.clone();
    let rows: Vec<Vec<Complex64>> = scn
        .signal
        .time_grid
        .par_iter()
        .map(|&t| {
            let snap = real.snapshot(scn, t)?;
            freqs.iter().map(|&f| snap.ctf(f)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(CtfFrame {
        realization: real.index,
        carrier: scn.signal.carrier_freq,
        times: scn.signal.time_grid.clone(),
        freqs,
        values: rows.into_iter().flatten().collect(),
    })
}

/// Every component of `H(t, f)` with its delay and weighted complex gain.
pub fn tap_list(real: &ChannelRealization, scn: &ValidatedScenario, t: f64, f: f64) -> Result<Vec<Tap>> {
    real.snapshot(scn, t)?.taps(f)
}
