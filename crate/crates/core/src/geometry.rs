//! Time-varying 2D geometry of the shallow-water channel.
//!
//! Coordinates live in the vertical plane through Tx and Rx. Heights are
//! measured up from the seabed, so the surface sits at `water_depth`. Every
//! departure/arrival angle is measured counter-clockwise from the horizontal
//! Tx-to-Rx axis and lies in `[0, 2π)`: rays leaving towards the surface have
//! angles in `(0, π/2)`, rays leaving towards the bottom in `(3π/2, 2π)`.
//! Angles of incidence (AOIs) are measured from the boundary normal.
//!
//! Reflected paths are described with the image method: a downward-arrival
//! (DA) path ends with a surface bounce, an upward-arrival (UA) path ends with
//! a bottom bounce. The specular ("macro") ray of each path fixes a cluster
//! centre on the first and last boundaries; diffuse ("micro") rays scatter
//! around those centres with Gaussian angle offsets.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use crate::error::{Error, Result};
use crate::motion::{surface_displacement, Displacement, SurfacePhase};
use crate::scenario::{ClusterConfig, GeometryConfig, IntentionalMotion, RngStream, SurfaceMotionConfig};

/// Upper bound on rejected draws per ray before giving up.
const MAX_RESAMPLES: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathClass {
    /// Downward arrival: last bounce at the surface.
    Da,
    /// Upward arrival: last bounce at the bottom.
    Ua,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Surface,
    Bottom,
}

/// Identifies one reflected path by its numbers of surface and bottom contacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathIndex {
    class: PathClass,
    surface: u32,
    bottom: u32,
}

impl PathIndex {
    /// DA path with `s` surface and `b_tilde` bottom contacts.
    pub fn da(s: u32, b_tilde: u32) -> Result<Self> {
        if s < 1 || b_tilde + 1 < s || b_tilde > s {
            return Err(Error::InvalidPath(format!(
                "DA({s},{b_tilde}) needs s >= 1 and s-1 <= b~ <= s"
            )));
        }
        Ok(PathIndex {
            class: PathClass::Da,
            surface: s,
            bottom: b_tilde,
        })
    }

    /// UA path with `b` bottom and `s_tilde` surface contacts.
    pub fn ua(b: u32, s_tilde: u32) -> Result<Self> {
        if b < 1 || s_tilde + 1 < b || s_tilde > b {
            return Err(Error::InvalidPath(format!(
                "UA({b},{s_tilde}) needs b >= 1 and b-1 <= s~ <= b"
            )));
        }
        Ok(PathIndex {
            class: PathClass::Ua,
            surface: s_tilde,
            bottom: b,
        })
    }

    /// Rejects paths with more bounces than the scenario allows.
    pub fn check_limits(&self, max_surface: u32, max_bottom: u32) -> Result<()> {
        let ok = match self.class {
            PathClass::Da => self.surface <= max_surface,
            PathClass::Ua => self.bottom <= max_bottom,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPath(format!("{self} exceeds the bounce limits")))
        }
    }

    pub fn class(&self) -> PathClass {
        self.class
    }

    pub fn surface_bounces(&self) -> u32 {
        self.surface
    }

    pub fn bottom_bounces(&self) -> u32 {
        self.bottom
    }

    pub fn is_single_bounce(&self) -> bool {
        self.surface + self.bottom == 1
    }

    pub fn first_bounce(&self) -> Boundary {
        match self.class {
            PathClass::Da if self.surface == self.bottom => Boundary::Bottom,
            PathClass::Da => Boundary::Surface,
            PathClass::Ua if self.surface == self.bottom => Boundary::Surface,
            PathClass::Ua => Boundary::Bottom,
        }
    }

    pub fn last_bounce(&self) -> Boundary {
        match self.class {
            PathClass::Da => Boundary::Surface,
            PathClass::Ua => Boundary::Bottom,
        }
    }

    /// Signed vertical extent of the unfolded (image) path.
    fn vertical_extent(&self, water_depth: f64, tx: f64, rx: f64) -> f64 {
        match self.class {
            PathClass::Da => {
                let sign = if (self.surface - self.bottom).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                2.0 * self.surface as f64 * water_depth + sign * tx - rx
            }
            PathClass::Ua => {
                let sign = if (self.bottom - self.surface).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                2.0 * self.surface as f64 * water_depth - sign * tx + rx
            }
        }
    }
}

impl fmt::Display for PathIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            PathClass::Da => write!(f, "DA({},{})", self.surface, self.bottom),
            PathClass::Ua => write!(f, "UA({},{})", self.bottom, self.surface),
        }
    }
}

/// All reflected paths: `2 * max_surface` DA paths then `2 * max_bottom` UA paths.
pub fn enumerate_paths(max_surface: u32, max_bottom: u32) -> Vec<PathIndex> {
    let mut out = Vec::with_capacity(2 * (max_surface + max_bottom) as usize);
    for s in 1..=max_surface {
        for b in s - 1..=s {
            out.push(PathIndex::da(s, b).expect("enumerated DA index is valid"));
        }
    }
    for b in 1..=max_bottom {
        for s in b - 1..=b {
            out.push(PathIndex::ua(b, s).expect("enumerated UA index is valid"));
        }
    }
    out
}

/// Platform placement at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryState {
    pub horizontal: f64,
    pub tx_height: f64,
    pub rx_height: f64,
    pub los_aod: f64,
    pub los_aoa: f64,
}

/// Moves both platforms along their intentional velocities to time `t`.
///
/// Drift is deliberately absent; it only perturbs path lengths.
pub fn evolve(cfg: &GeometryConfig, motion: &IntentionalMotion, t: f64) -> Result<GeometryState> {
    let horizontal = cfg.horizontal_distance - motion.tx_speed * t * motion.tx_angle.cos()
        + motion.rx_speed * t * motion.rx_angle.cos();
    let tx_height = cfg.tx_height + motion.tx_speed * t * motion.tx_angle.sin();
    let rx_height = cfg.rx_height + motion.rx_speed * t * motion.rx_angle.sin();
    for (what, value) in [("tx height", tx_height), ("rx height", rx_height)] {
        if !(value > 0.0 && value < cfg.water_depth) {
            return Err(Error::WaterColumnBreach { t, what, value });
        }
    }
    if !(horizontal > 0.0) {
        return Err(Error::WaterColumnBreach {
            t,
            what: "horizontal distance",
            value: horizontal,
        });
    }
    let los_aod = ((rx_height - tx_height) / horizontal).atan();
    Ok(GeometryState {
        horizontal,
        tx_height,
        rx_height,
        los_aod,
        los_aoa: los_aod + PI,
    })
}

/// Line-of-sight path length including first-order drift projections.
pub fn los_distance(g: &GeometryState, drift_tx: Displacement, drift_rx: Displacement) -> f64 {
    g.horizontal.hypot(g.rx_height - g.tx_height)
        - drift_tx.projected_onto(g.los_aod)
        - drift_rx.projected_onto(g.los_aoa)
}

/// Specular geometry of one reflected path at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterGeometry {
    pub index: PathIndex,
    /// Length of the specular path.
    pub distance: f64,
    /// Angle of incidence at every boundary, `(0, π/2)`.
    pub aoi: f64,
    pub first_bounce: Boundary,
    pub last_bounce: Boundary,
    /// Mean departure angle, towards the first-bounce cluster.
    pub mean_aod: f64,
    /// Mean arrival angle, from the last-bounce cluster.
    pub mean_aoa: f64,
    /// Tx to first-bounce cluster.
    pub tx_leg: f64,
    /// Last-bounce cluster to Rx.
    pub rx_leg: f64,
    /// First-bounce to last-bounce cluster; zero for single bounce.
    pub mid_leg: f64,
    /// Vertical distance from Tx to its first boundary.
    pub tx_rise: f64,
    /// Vertical distance from Rx to its last boundary.
    pub rx_rise: f64,
    pub horizontal: f64,
}

fn rise(boundary: Boundary, height: f64, water_depth: f64) -> f64 {
    match boundary {
        Boundary::Surface => water_depth - height,
        Boundary::Bottom => height,
    }
}

/// Specular (macro) ray of path `idx` by the image method.
pub fn macro_ray(g: &GeometryState, water_depth: f64, idx: PathIndex) -> Result<ClusterGeometry> {
    let vertical = idx.vertical_extent(water_depth, g.tx_height, g.rx_height);
    if !(vertical > 0.0) {
        return Err(Error::AngleOutOfRange(if vertical == 0.0 { FRAC_PI_2 } else { PI }));
    }
    let distance = g.horizontal.hypot(vertical);
    let aoi = g.horizontal.atan2(vertical);
    let first_bounce = idx.first_bounce();
    let last_bounce = idx.last_bounce();
    let mean_aod = match first_bounce {
        Boundary::Surface => FRAC_PI_2 - aoi,
        Boundary::Bottom => 1.5 * PI + aoi,
    };
    let mean_aoa = match last_bounce {
        Boundary::Surface => FRAC_PI_2 + aoi,
        Boundary::Bottom => 1.5 * PI - aoi,
    };
    let tx_rise = rise(first_bounce, g.tx_height, water_depth);
    let rx_rise = rise(last_bounce, g.rx_height, water_depth);
    let tx_leg = tx_rise / aoi.cos();
    let rx_leg = rx_rise / aoi.cos();
    let mid_leg = if idx.is_single_bounce() {
        0.0
    } else {
        (distance - tx_leg - rx_leg).max(0.0)
    };
    Ok(ClusterGeometry {
        index: idx,
        distance,
        aoi,
        first_bounce,
        last_bounce,
        mean_aod,
        mean_aoa,
        tx_leg,
        rx_leg,
        mid_leg,
        tx_rise,
        rx_rise,
        horizontal: g.horizontal,
    })
}

/// Random draws of one micro-scattering ray, frozen for its whole life.
///
/// Angles are kept as offsets from the cluster means so that the ray follows
/// its cluster as the geometry evolves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroRay {
    /// Departure offset; unused for single bounce where it follows from the arrival.
    pub aod_offset: f64,
    pub aoa_offset: f64,
    /// Surface phase of the first-bounce scatterer, when it sits on the surface.
    pub surface_phase_tx: Option<SurfacePhase>,
    /// Surface phase of the last-bounce scatterer, when it sits on the surface.
    pub surface_phase_rx: Option<SurfacePhase>,
    /// Log-scale perturbation of the middle leg.
    pub delta_ds: f64,
    pub single_bounce: bool,
    /// Draws rejected for leaving the geometric branch.
    pub resamples: u32,
}

/// Angles and leg lengths of a micro ray at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroRayGeometry {
    pub aod: f64,
    pub aoa: f64,
    pub tx_leg: f64,
    pub mid_leg: f64,
    pub rx_leg: f64,
}

impl MicroRayGeometry {
    pub fn length(&self) -> f64 {
        self.tx_leg + self.mid_leg + self.rx_leg
    }
}

fn spread_for(boundary: Boundary, spreads: &ClusterConfig) -> f64 {
    match boundary {
        Boundary::Surface => spreads.sigma_phi_surface,
        Boundary::Bottom => spreads.sigma_phi_bottom,
    }
}

/// Elevation of a departure angle above (surface) or below (bottom) the horizontal.
fn departure_elevation(boundary: Boundary, aod: f64) -> f64 {
    match boundary {
        Boundary::Surface => aod,
        Boundary::Bottom => TAU - aod,
    }
}

fn arrival_elevation(boundary: Boundary, aoa: f64) -> f64 {
    match boundary {
        Boundary::Surface => PI - aoa,
        Boundary::Bottom => aoa - PI,
    }
}

/// A leg is in its branch when it heads forward towards the boundary and
/// meets it no further away horizontally than the other platform.
fn in_branch(elevation: f64, rise: f64, horizontal: f64) -> bool {
    elevation > 0.0 && elevation < FRAC_PI_2 && rise / elevation.tan() <= horizontal
}

/// Draws a multi-bounce micro ray around cluster `c`.
///
/// Departure and arrival offsets are independent Gaussians whose spread is
/// chosen by the boundary each end interacts with. Draws outside the
/// geometric branch are rejected and redrawn.
pub fn sample_micro_ray_mb(c: &ClusterGeometry, spreads: &ClusterConfig, rng: &mut RngStream) -> Result<MicroRay> {
    if c.index.is_single_bounce() {
        return Err(Error::InvalidPath(format!("{} is single bounce", c.index)));
    }
    let sigma_t = spread_for(c.first_bounce, spreads);
    let sigma_r = spread_for(c.last_bounce, spreads);
    let mut resamples = 0;
    let (aod, aoa) = loop {
        let aod = rng.normal(c.mean_aod, sigma_t);
        let aoa = rng.normal(c.mean_aoa, sigma_r);
        if in_branch(departure_elevation(c.first_bounce, aod), c.tx_rise, c.horizontal)
            && in_branch(arrival_elevation(c.last_bounce, aoa), c.rx_rise, c.horizontal)
        {
            break (aod, aoa);
        }
        resamples += 1;
        if resamples >= MAX_RESAMPLES {
            return Err(Error::Grazing(format!(
                "{}: angle draws never left the grazing region",
                c.index
            )));
        }
    };
    let delta_ds = rng.normal(0.0, spreads.sigma_ds);
    let surface_phase_tx = (c.first_bounce == Boundary::Surface).then(|| SurfacePhase::draw(rng));
    let surface_phase_rx = (c.last_bounce == Boundary::Surface).then(|| SurfacePhase::draw(rng));
    Ok(MicroRay {
        aod_offset: aod - c.mean_aod,
        aoa_offset: aoa - c.mean_aoa,
        surface_phase_tx,
        surface_phase_rx,
        delta_ds,
        single_bounce: false,
        resamples,
    })
}

/// Departure angle of a single-bounce ray that arrives at angle `aoa`.
///
/// The bounce point is where the arrival direction meets the boundary; the
/// departure is the direction from Tx to that point.
pub fn single_bounce_aod(class: PathClass, g: &GeometryState, water_depth: f64, aoa: f64) -> Result<f64> {
    let (elevation, rx_rise, tx_rise) = match class {
        PathClass::Da => (PI - aoa, water_depth - g.rx_height, water_depth - g.tx_height),
        PathClass::Ua => (aoa - PI, g.rx_height, g.tx_height),
    };
    if !(elevation > 0.0 && elevation < FRAC_PI_2) {
        return Err(Error::Grazing(format!("arrival angle {aoa} rad has no bounce point")));
    }
    let remaining = g.horizontal - rx_rise / elevation.tan();
    if !(remaining > 0.0) {
        return Err(Error::Grazing(format!("arrival angle {aoa} rad bounces behind the Tx")));
    }
    let up = (tx_rise / remaining).atan();
    Ok(match class {
        PathClass::Da => up,
        PathClass::Ua => TAU - up,
    })
}

/// Draws a single-bounce micro ray; the departure angle is tied to the arrival.
pub fn sample_micro_ray_sb(
    c: &ClusterGeometry,
    g: &GeometryState,
    water_depth: f64,
    spreads: &ClusterConfig,
    rng: &mut RngStream,
) -> Result<MicroRay> {
    if !c.index.is_single_bounce() {
        return Err(Error::InvalidPath(format!("{} is multi bounce", c.index)));
    }
    let sigma = spread_for(c.last_bounce, spreads);
    let mut resamples = 0;
    let aoa = loop {
        let aoa = rng.normal(c.mean_aoa, sigma);
        if in_branch(arrival_elevation(c.last_bounce, aoa), c.rx_rise, c.horizontal)
            && single_bounce_aod(c.index.class(), g, water_depth, aoa).is_ok()
        {
            break aoa;
        }
        resamples += 1;
        if resamples >= MAX_RESAMPLES {
            return Err(Error::Grazing(format!(
                "{}: angle draws never left the grazing region",
                c.index
            )));
        }
    };
    // One scatterer serves both legs of a surface bounce; a bottom bounce is static.
    let phase = match c.index.class() {
        PathClass::Da => Some(SurfacePhase::draw(rng)),
        PathClass::Ua => None,
    };
    Ok(MicroRay {
        aod_offset: 0.0,
        aoa_offset: aoa - c.mean_aoa,
        surface_phase_tx: phase,
        surface_phase_rx: phase,
        delta_ds: 0.0,
        single_bounce: true,
        resamples,
    })
}

fn surface_term(surf: &SurfaceMotionConfig, phase: Option<SurfacePhase>, angle: f64, t: f64) -> f64 {
    match phase {
        Some(th) => surface_displacement(surf, th, t) * (angle - surf.travel_angle).cos(),
        None => 0.0,
    }
}

fn checked_sin(x: f64, what: &str) -> Result<f64> {
    let s = x.sin();
    if s > 1e-12 {
        Ok(s)
    } else {
        Err(Error::Grazing(format!("{what}: sine {s} of {x} rad")))
    }
}

/// Leg lengths of a micro ray at time `t`.
///
/// `c` and `g` must describe the geometry at the same instant `t`.
#[allow(clippy::too_many_arguments)]
pub fn micro_ray_distances(
    ray: &MicroRay,
    c: &ClusterGeometry,
    g: &GeometryState,
    water_depth: f64,
    drift_tx: Displacement,
    drift_rx: Displacement,
    surf: &SurfaceMotionConfig,
    t: f64,
) -> Result<MicroRayGeometry> {
    let aoa = c.mean_aoa + ray.aoa_offset;
    let aod = if ray.single_bounce {
        single_bounce_aod(c.index.class(), g, water_depth, aoa)?
    } else {
        c.mean_aod + ray.aod_offset
    };

    let tx_leg = match c.first_bounce {
        Boundary::Surface => {
            surface_term(surf, ray.surface_phase_tx, aod, t)
                + (water_depth - g.tx_height) / checked_sin(aod, "departure")?
        }
        Boundary::Bottom => g.tx_height / checked_sin(TAU - aod, "departure")?,
    } - drift_tx.projected_onto(aod);

    let rx_leg = match c.last_bounce {
        Boundary::Surface => {
            surface_term(surf, ray.surface_phase_rx, aoa, t)
                + (water_depth - g.rx_height) / checked_sin(PI - aoa, "arrival")?
        }
        Boundary::Bottom => g.rx_height / checked_sin(aoa - PI, "arrival")?,
    } - drift_rx.projected_onto(aoa);

    let mid_leg = if ray.single_bounce {
        0.0
    } else {
        c.mid_leg * ray.delta_ds.exp()
    };
    Ok(MicroRayGeometry {
        aod,
        aoa,
        tx_leg,
        mid_leg,
        rx_leg,
    })
}
