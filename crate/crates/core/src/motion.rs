//! Platform drift and surface-scatterer motion.
//!
//! Intentional constant-velocity motion enters the channel geometry directly
//! (see [`crate::geometry::evolve`]). The two processes here only perturb
//! path lengths: a piecewise-constant random drift velocity per platform and
//! a sinusoidal displacement per surface scatterer.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::scenario::{normalize_angle, DriftConfig, RngStream, SurfaceMotionConfig};

/// Constant drift velocity over one change interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSegment {
    pub speed: f64,
    /// Direction of travel in the vertical plane, `[0, 2π)`.
    pub bearing: f64,
}

/// Length and direction of an accumulated displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Displacement {
    pub magnitude: f64,
    /// Zero when the magnitude is zero.
    pub bearing: f64,
}

impl Displacement {
    pub const ZERO: Displacement = Displacement {
        magnitude: 0.0,
        bearing: 0.0,
    };

    /// Length of the projection onto direction `angle`.
    pub fn projected_onto(&self, angle: f64) -> f64 {
        self.magnitude * (self.bearing - angle).cos()
    }
}

/// Realized drift of one platform over the simulated horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftState {
    start: f64,
    interval: f64,
    segments: Vec<DriftSegment>,
    // Displacement vector (horizontal, vertical) at each interval boundary.
    knots: Vec<[f64; 2]>,
}

impl DriftState {
    /// Builds a drift path from explicit segments; intervals start at `start`.
    pub fn from_segments(start: f64, interval: f64, segments: Vec<DriftSegment>) -> Self {
        assert!(interval > 0.0, "drift interval must be positive");
        assert!(!segments.is_empty(), "drift needs at least one interval");
        let mut knots = Vec::with_capacity(segments.len() + 1);
        let mut acc = [0.0f64; 2];
        knots.push(acc);
        for seg in &segments {
            acc[0] += seg.speed * seg.bearing.cos() * interval;
            acc[1] += seg.speed * seg.bearing.sin() * interval;
            knots.push(acc);
        }
        DriftState {
            start,
            interval,
            segments,
            knots,
        }
    }

    /// A platform that never drifts.
    pub fn still(start: f64, end: f64) -> Self {
        let interval = (end - start).max(1.0);
        Self::from_segments(
            start,
            interval,
            vec![DriftSegment {
                speed: 0.0,
                bearing: 0.0,
            }],
        )
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.interval * self.segments.len() as f64
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn segments(&self) -> &[DriftSegment] {
        &self.segments
    }

    /// Interval boundaries, including both ends of the horizon.
    pub fn boundaries(&self) -> Vec<f64> {
        (0..=self.segments.len())
            .map(|k| self.start + self.interval * k as f64)
            .collect()
    }

    /// Displacement vector `(horizontal, vertical)` accumulated since the start.
    pub fn displacement_vector(&self, t: f64) -> Result<[f64; 2]> {
        let end = self.end();
        let slack = 1e-9 * self.interval;
        if !(t >= self.start - slack && t <= end + slack) {
            return Err(Error::OutsideHorizon {
                t,
                start: self.start,
                end,
            });
        }
        let n = self.segments.len();
        let rel = (t - self.start).max(0.0);
        let k = ((rel / self.interval).floor() as usize).min(n - 1);
        let dt = rel - self.interval * k as f64;
        let seg = self.segments[k];
        let base = self.knots[k];
        Ok([
            base[0] + seg.speed * seg.bearing.cos() * dt,
            base[1] + seg.speed * seg.bearing.sin() * dt,
        ])
    }

    /// Magnitude and argument of the integrated drift velocity at `t`.
    pub fn displacement(&self, t: f64) -> Result<Displacement> {
        let [x, z] = self.displacement_vector(t)?;
        let magnitude = x.hypot(z);
        if magnitude == 0.0 {
            return Ok(Displacement::ZERO);
        }
        Ok(Displacement {
            magnitude,
            bearing: normalize_angle(z.atan2(x)),
        })
    }
}

/// Draws a drift path covering `[start, start + horizon]`.
///
/// The velocity is redrawn every `1 / change_freq` seconds with speed uniform
/// in `[v_min, v_max]` and bearing uniform in `[0, 2π)`.
pub fn build_drift(cfg: &DriftConfig, start: f64, horizon: f64, rng: &mut RngStream) -> DriftState {
    let interval = 1.0 / cfg.change_freq;
    let count = ((horizon.max(0.0) * cfg.change_freq - 1e-9).ceil() as usize).max(1);
    let segments = (0..count)
        .map(|_| {
            let speed = rng.uniform_in(cfg.v_min, cfg.v_max);
            let bearing = rng.angle();
            DriftSegment { speed, bearing }
        })
        .collect();
    DriftState::from_segments(start, interval, segments)
}

/// Phase of one surface scatterer's periodic motion, `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePhase(f64);

impl SurfacePhase {
    pub fn new(theta: f64) -> Self {
        SurfacePhase(normalize_angle(theta))
    }

    pub fn draw(rng: &mut RngStream) -> Self {
        SurfacePhase(rng.angle())
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Scalar displacement `A sin(2π f t + θ)` of a surface scatterer.
///
/// Projection onto a ray direction is left to the caller.
pub fn surface_displacement(cfg: &SurfaceMotionConfig, theta: SurfacePhase, t: f64) -> f64 {
    cfg.amplitude * (TAU * cfg.freq * t + theta.0).sin()
}

/// Time derivative of [`surface_displacement`].
pub fn surface_speed(cfg: &SurfaceMotionConfig, theta: SurfacePhase, t: f64) -> f64 {
    TAU * cfg.freq * cfg.amplitude * (TAU * cfg.freq * t + theta.0).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::stream_for;
    use std::f64::consts::PI;

    fn drift(v_min: f64, v_max: f64) -> DriftConfig {
        DriftConfig {
            v_min,
            v_max,
            change_freq: 1.0,
        }
    }

    #[test]
    fn zero_speed_drift_stays_put() {
        let mut rng = stream_for(1, 0, "drift");
        let d = build_drift(&drift(0.0, 0.0), 0.0, 10.0, &mut rng);
        for i in 0..=100 {
            let disp = d.displacement(i as f64 * 0.1).unwrap();
            assert_eq!(disp, Displacement::ZERO);
        }
    }

    #[test]
    fn one_hertz_ten_seconds_gives_ten_intervals() {
        let mut rng = stream_for(1, 0, "drift");
        let d = build_drift(&drift(0.1, 0.12), 0.0, 10.0, &mut rng);
        assert_eq!(d.segments().len(), 10);
        let b = d.boundaries();
        for (k, w) in b.windows(2).enumerate() {
            assert_eq!(w[1] - w[0], 1.0, "interval {k}");
        }
        for seg in d.segments() {
            assert!((0.1..=0.12).contains(&seg.speed));
            assert!((0.0..TAU).contains(&seg.bearing));
        }
    }

    #[test]
    fn fixed_bearing_is_straight_line() {
        let v = 0.11;
        let beta = 0.7;
        let segs = vec![
            DriftSegment {
                speed: v,
                bearing: beta
            };
            10
        ];
        let d = DriftState::from_segments(2.0, 1.0, segs);
        for i in 0..=40 {
            let t = 2.0 + i as f64 * 0.25;
            let disp = d.displacement(t).unwrap();
            assert!((disp.magnitude - v * (t - 2.0)).abs() < 1e-12);
            if disp.magnitude > 0.0 {
                assert!((disp.bearing - beta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_integral_at_start() {
        let mut rng = stream_for(5, 0, "drift");
        let d = build_drift(&drift(0.1, 0.2), 3.0, 4.0, &mut rng);
        assert_eq!(d.displacement(3.0).unwrap(), Displacement::ZERO);
    }

    #[test]
    fn single_segment_integral() {
        let d = DriftState::from_segments(
            0.0,
            1.0,
            vec![DriftSegment {
                speed: 0.1,
                bearing: 0.0,
            }],
        );
        let disp = d.displacement(1.0).unwrap();
        assert!((disp.magnitude - 0.1).abs() < 1e-15);
        assert_eq!(disp.bearing, 0.0);
    }

    #[test]
    fn opposite_segments_cancel() {
        let d = DriftState::from_segments(
            0.0,
            1.0,
            vec![
                DriftSegment {
                    speed: 0.1,
                    bearing: 0.3,
                },
                DriftSegment {
                    speed: 0.1,
                    bearing: 0.3 + PI,
                },
            ],
        );
        assert!(d.displacement(2.0).unwrap().magnitude < 1e-15);
    }

    #[test]
    fn outside_horizon_is_error() {
        let d = DriftState::from_segments(
            0.0,
            1.0,
            vec![DriftSegment {
                speed: 0.1,
                bearing: 0.0,
            }],
        );
        assert!(matches!(d.displacement(1.5), Err(Error::OutsideHorizon { .. })));
        assert!(matches!(d.displacement(-0.1), Err(Error::OutsideHorizon { .. })));
    }

    fn surf(amplitude: f64, freq: f64) -> SurfaceMotionConfig {
        SurfaceMotionConfig {
            amplitude,
            freq,
            travel_angle: PI / 2.0,
        }
    }

    #[test]
    fn surface_displacement_values() {
        let th = SurfacePhase::new(0.0);
        assert_eq!(surface_displacement(&surf(0.0, 0.1), th, 3.3), 0.0);
        assert!((surface_displacement(&surf(2.0, 0.1), th, 2.5) - 2.0).abs() < 1e-12);
        assert!((surface_speed(&surf(2.0, 0.1), th, 0.0) - 1.2566370614359172).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn drift_continuous_and_scales(seed in any::<u64>(), t in 0.0f64..9.999) {
                let mut rng = stream_for(seed, 0, "drift");
                let d = build_drift(&drift(0.05, 0.2), 0.0, 10.0, &mut rng);
                let a = d.displacement_vector(t).unwrap();
                let b = d.displacement_vector(t + 1e-9).unwrap();
                prop_assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9);

                let doubled: Vec<_> = d.segments().iter()
                    .map(|s| DriftSegment { speed: 2.0 * s.speed, bearing: s.bearing })
                    .collect();
                let d2 = DriftState::from_segments(0.0, 1.0, doubled);
                let p = d.displacement(t).unwrap();
                let q = d2.displacement(t).unwrap();
                prop_assert!((q.magnitude - 2.0 * p.magnitude).abs() <= 1e-12 * p.magnitude.max(1.0));
                if p.magnitude > 1e-9 {
                    prop_assert!((q.bearing - p.bearing).abs() < 1e-9);
                }
            }

            #[test]
            fn surface_periodic(th in 0.0f64..TAU, f in 0.01f64..2.0, t in -50.0f64..50.0) {
                let cfg = surf(1.7, f);
                let th = SurfacePhase::new(th);
                let a = surface_displacement(&cfg, th, t);
                let b = surface_displacement(&cfg, th, t + 1.0 / f);
                prop_assert!((a - b).abs() < 1e-12 * (1.0 + t.abs() * f) * 10.0);
                prop_assert!(a.abs() <= cfg.amplitude);
            }

            #[test]
            fn surface_speed_is_derivative(th in 0.0f64..TAU, f in 0.05f64..1.0, t in 0.0f64..20.0) {
                let cfg = surf(2.0, f);
                let th = SurfacePhase::new(th);
                let h = 1e-6;
                let fd = (surface_displacement(&cfg, th, t + h) - surface_displacement(&cfg, th, t - h)) / (2.0 * h);
                let an = surface_speed(&cfg, th, t);
                // Relative error bound near zero crossings uses the peak speed as scale.
                let scale = an.abs().max(TAU * f * cfg.amplitude * 1e-3);
                prop_assert!((fd - an).abs() / scale < 1e-6, "fd {} an {}", fd, an);
            }
        }
    }
}
