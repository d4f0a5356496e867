//! Correlation functions, power delay profiles and delay statistics.
//!
//! Two correlation estimators are provided. The Monte-Carlo expectation
//! averages, over independent realizations, the per-ray lag products with
//! the random initial phases integrated out; cross terms between rays
//! vanish in expectation and are dropped. The empirical estimator averages
//! `H(t, f) H*(t - Δt, f - Δf)` of realized transfer functions and keeps
//! every cross term.
//!
//! Ensemble work runs in parallel, but per-realization results are collected
//! in index order and reduced sequentially, so outputs do not depend on the
//! number of workers.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{build_realization, ChannelRealization, GainModel, Snapshot};
use crate::error::{Error, Result};
use crate::scenario::ValidatedScenario;

/// Time and frequency lag of a correlation value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lag {
    pub dt: f64,
    pub df: f64,
}

impl Lag {
    pub const ZERO: Lag = Lag { dt: 0.0, df: 0.0 };

    pub fn time(dt: f64) -> Self {
        Lag { dt, df: 0.0 }
    }
}

/// Temporal lags `0, step, 2 step, ..` up to and including `max_lag`.
pub fn time_lags(max_lag: f64, step: f64) -> Vec<Lag> {
    let count = (max_lag / step + 1e-9).floor() as usize;
    (0..=count).map(|i| Lag::time(step * i as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    /// Ensemble mean of the per-ray lag products.
    MonteCarlo,
    /// Ensemble mean of lag products of realized transfer functions.
    Empirical,
}

/// Ensemble settings shared by every statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub realizations: u32,
    /// Worker threads; zero uses the global pool.
    pub jobs: usize,
    pub gain_model: GainModel,
}

impl EnsembleOptions {
    pub fn new(realizations: u32) -> Self {
        EnsembleOptions {
            realizations,
            jobs: 0,
            gain_model: GainModel::Physical,
        }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs;
        self
    }

    pub fn with_gain_model(mut self, model: GainModel) -> Self {
        self.gain_model = model;
        self
    }
}

/// Runs `f` on every realization index and returns the results in index order.
fn over_ensemble<T, F>(opts: &EnsembleOptions, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let run = || {
        (0..opts.realizations as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<T>>>()
    };
    if opts.jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?
            .install(run)
    }
}

fn realization(scn: &ValidatedScenario, idx: u64, model: GainModel) -> Result<ChannelRealization> {
    Ok(build_realization(scn, idx)?.with_gain_model(model))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub anchor_time: f64,
    pub anchor_freq: f64,
    pub lags: Vec<Lag>,
    /// Ensemble-mean correlation per lag.
    pub values: Vec<Complex64>,
    /// Zero-lag value used for normalization.
    pub zero_lag: Complex64,
    /// `|R(lag)| / |R(0)|`.
    pub normalized: Vec<f64>,
    /// Standard error of each ensemble mean, in normalized units.
    pub std_error: Vec<f64>,
    pub estimator: Estimator,
    pub ensemble: u32,
}

fn check_lags(scn: &ValidatedScenario, t: f64, f: f64, lags: &[Lag]) -> Result<()> {
    let (start, end) = scn.horizon();
    let slack = 1e-9 * (end - start).max(1.0);
    for lag in lags {
        let tl = t - lag.dt;
        for when in [t, tl] {
            if !(when >= start - slack && when <= end + slack) {
                return Err(Error::OutsideHorizon { t: when, start, end });
            }
        }
        if !(scn.signal.carrier_freq + f - lag.df > 0.0) {
            return Err(Error::NonPositive {
                quantity: "lagged absolute frequency",
                value: scn.signal.carrier_freq + f - lag.df,
            });
        }
    }
    Ok(())
}

/// Per-ray lag products with the initial phases removed, summed over rays.
fn diagonal_product(now: &Snapshot, then: &Snapshot, f: f64, df: f64) -> Result<Complex64> {
    let g_now = now.cluster_gains(f)?;
    let g_then = then.cluster_gains(f - df)?;
    let fa = now.carrier + f;
    let fb = now.carrier + f - df;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in now.components.iter().zip(&then.components) {
        let mag = a.weight * b.weight * g_now[a.cluster] * g_then[b.cluster];
        let arg = std::f64::consts::TAU * (fb * b.delay - fa * a.delay);
        acc += Complex64::from_polar(mag, arg);
    }
    Ok(acc)
}

/// Lag products of one realization; the first entry is the zero lag.
fn realization_products(
    real: &ChannelRealization,
    scn: &ValidatedScenario,
    t: f64,
    f: f64,
    lags: &[Lag],
    estimator: Estimator,
) -> Result<Vec<Complex64>> {
    let now = real.snapshot(scn, t)?;
    let mut out = Vec::with_capacity(lags.len() + 1);
    let mut cache: Vec<(f64, Snapshot)> = Vec::new();
    for lag in std::iter::once(&Lag::ZERO).chain(lags) {
        let then = if lag.dt == 0.0 {
            &now
        } else {
            let pos = match cache.iter().position(|(dt, _)| *dt == lag.dt) {
                Some(p) => p,
                None => {
                    cache.push((lag.dt, real.snapshot(scn, t - lag.dt)?));
                    cache.len() - 1
                }
            };
            &cache[pos].1
        };
        out.push(match estimator {
            Estimator::MonteCarlo => diagonal_product(&now, then, f, lag.df)?,
            Estimator::Empirical => now.ctf(f)? * then.ctf(f - lag.df)?.conj(),
        });
    }
    Ok(out)
}

/// Ensemble time-frequency correlation `E{H(t, f) H*(t - Δt, f - Δf)}`.
pub fn correlation(
    scn: &ValidatedScenario,
    t: f64,
    f: f64,
    lags: &[Lag],
    estimator: Estimator,
    opts: &EnsembleOptions,
) -> Result<CorrelationResult> {
    check_lags(scn, t, f, lags)?;
    if opts.realizations == 0 {
        return Err(Error::config("mc_realizations", 0, "ensemble size must be at least 1"));
    }
    let per = over_ensemble(opts, |i| {
        let real = realization(scn, i, opts.gain_model)?;
        realization_products(&real, scn, t, f, lags, estimator)
    })?;
    let n = per.len() as f64;
    let width = lags.len() + 1;
    let mut mean = vec![Complex64::new(0.0, 0.0); width];
    for row in &per {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; width];
    for row in &per {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m).norm_sqr();
        }
    }
    let zero_lag = mean[0];
    let scale = zero_lag.norm();
    if !(scale > 0.0) {
        return Err(Error::ZeroPower);
    }
    let std_error = var
        .iter()
        .skip(1)
        .map(|s| {
            if n > 1.0 {
                (s / (n - 1.0) / n).sqrt() / scale
            } else {
                0.0
            }
        })
        .collect();
    let values: Vec<Complex64> = mean[1..].to_vec();
    Ok(CorrelationResult {
        anchor_time: t,
        anchor_freq: f,
        lags: lags.to_vec(),
        normalized: values.iter().map(|v| v.norm() / scale).collect(),
        values,
        zero_lag,
        std_error,
        estimator,
        ensemble: opts.realizations,
    })
}

/// Monte-Carlo expectation of the time-frequency correlation.
pub fn tfcf_monte_carlo(
    scn: &ValidatedScenario,
    t: f64,
    f: f64,
    lags: &[Lag],
    opts: &EnsembleOptions,
) -> Result<CorrelationResult> {
    correlation(scn, t, f, lags, Estimator::MonteCarlo, opts)
}

/// Temporal autocorrelation at `(t, f)` over the time lags `dts`.
pub fn acf(scn: &ValidatedScenario, t: f64, f: f64, dts: &[f64], opts: &EnsembleOptions) -> Result<CorrelationResult> {
    let lags: Vec<Lag> = dts.iter().map(|&dt| Lag::time(dt)).collect();
    correlation(scn, t, f, &lags, Estimator::MonteCarlo, opts)
}

/// Temporal autocorrelation estimated from realized transfer functions.
pub fn empirical_acf(
    scn: &ValidatedScenario,
    t: f64,
    f: f64,
    dts: &[f64],
    opts: &EnsembleOptions,
) -> Result<CorrelationResult> {
    let lags: Vec<Lag> = dts.iter().map(|&dt| Lag::time(dt)).collect();
    correlation(scn, t, f, &lags, Estimator::Empirical, opts)
}

/// Smallest lag at which the normalized magnitude first drops below `level`.
pub fn first_crossing(result: &CorrelationResult, level: f64) -> Option<f64> {
    result
        .lags
        .iter()
        .zip(&result.normalized)
        .find(|(_, &v)| v < level)
        .map(|(l, _)| l.dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdpMode {
    /// One impulse per path at its specular delay, carrying the power of all its rays.
    Cluster,
    /// One impulse per ray.
    Ray,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Impulse {
    /// Absolute propagation delay.
    pub delay: f64,
    pub power: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdpResult {
    pub anchor_time: f64,
    pub anchor_freq: f64,
    pub mode: PdpMode,
    /// Impulses with positive power, sorted by delay.
    pub impulses: Vec<Impulse>,
}

impl PdpResult {
    /// Delay of the first arrival.
    pub fn first_arrival(&self) -> f64 {
        self.impulses.first().map_or(0.0, |i| i.delay)
    }

    /// `(delay relative to the first arrival, power)` pairs.
    pub fn normalized(&self) -> Vec<(f64, f64)> {
        let first = self.first_arrival();
        self.impulses.iter().map(|i| (i.delay - first, i.power)).collect()
    }

    /// Power summed into bins of `width` seconds after the first arrival.
    ///
    /// Presentation only; delay statistics always use the impulses.
    pub fn binned(&self, width: f64) -> Vec<(f64, f64)> {
        let mut bins: Vec<(f64, f64)> = Vec::new();
        for (d, p) in self.normalized() {
            let k = (d / width).floor();
            let start = k * width;
            match bins.last_mut() {
                Some(last) if last.0 == start => last.1 += p,
                _ => bins.push((start, p)),
            }
        }
        bins
    }
}

/// Power delay profile of one realization at `(t, f)`.
pub fn pdp(real: &ChannelRealization, scn: &ValidatedScenario, t: f64, f: f64, mode: PdpMode) -> Result<PdpResult> {
    let snap = real.snapshot(scn, t)?;
    let gains = snap.cluster_gains(f)?;
    let c = snap.sound_speed;
    let mut impulses: Vec<Impulse> = match mode {
        PdpMode::Cluster => snap
            .clusters
            .iter()
            .zip(&gains)
            .map(|(cl, g)| Impulse {
                delay: cl.delay(c),
                power: cl.ray_count as f64 * (cl.weight * g).powi(2),
                label: cl.label.clone(),
            })
            .collect(),
        PdpMode::Ray => snap
            .components
            .iter()
            .map(|comp| Impulse {
                delay: comp.delay,
                power: (comp.weight * gains[comp.cluster]).powi(2),
                label: if comp.cluster == 0 {
                    "LoS".to_string()
                } else {
                    format!("{}#{}", snap.clusters[comp.cluster].label, comp.ray)
                },
            })
            .collect(),
    };
    impulses.retain(|i| i.power > 0.0);
    impulses.sort_by(|a, b| a.delay.total_cmp(&b.delay));
    Ok(PdpResult {
        anchor_time: t,
        anchor_freq: f,
        mode,
        impulses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayStats {
    /// Mean delay relative to the first arrival.
    pub mean_delay: f64,
    pub rms_spread: f64,
}

/// Power-weighted mean delay and RMS spread of `(delay, power)` impulses.
///
/// The mean is reported relative to `reference`.
pub fn delay_stats_of(impulses: &[(f64, f64)], reference: f64) -> Result<DelayStats> {
    let total: f64 = impulses.iter().map(|(_, p)| p).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroPower);
    }
    let mean = impulses.iter().map(|(d, p)| d * p).sum::<f64>() / total;
    let var = impulses.iter().map(|(d, p)| (d - mean).powi(2) * p).sum::<f64>() / total;
    Ok(DelayStats {
        mean_delay: mean - reference,
        rms_spread: var.sqrt(),
    })
}

/// Delay statistics of a profile, with the mean relative to the first arrival.
pub fn delay_stats(pdp: &PdpResult) -> Result<DelayStats> {
    let pairs: Vec<(f64, f64)> = pdp.impulses.iter().map(|i| (i.delay, i.power)).collect();
    delay_stats_of(&pairs, pdp.first_arrival())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleDelayStats {
    pub mean: DelayStats,
    /// Sample standard deviation across realizations.
    pub std: DelayStats,
    pub per_realization: Vec<DelayStats>,
}

/// Per-realization delay statistics summarized by their ensemble mean and spread.
pub fn ensemble_delay_stats(
    scn: &ValidatedScenario,
    t: f64,
    f: f64,
    mode: PdpMode,
    opts: &EnsembleOptions,
) -> Result<EnsembleDelayStats> {
    if opts.realizations == 0 {
        return Err(Error::config("mc_realizations", 0, "ensemble size must be at least 1"));
    }
    let per = over_ensemble(opts, |i| {
        let real = realization(scn, i, opts.gain_model)?;
        delay_stats(&pdp(&real, scn, t, f, mode)?)
    })?;
    let n = per.len() as f64;
    let mu = per.iter().map(|s| s.mean_delay).sum::<f64>() / n;
    let sg = per.iter().map(|s| s.rms_spread).sum::<f64>() / n;
    let spread = |sel: fn(&DelayStats) -> f64, m: f64| {
        if per.len() < 2 {
            0.0
        } else {
            (per.iter().map(|s| (sel(s) - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        }
    };
    Ok(EnsembleDelayStats {
        mean: DelayStats {
            mean_delay: mu,
            rms_spread: sg,
        },
        std: DelayStats {
            mean_delay: spread(|s| s.mean_delay, mu),
            rms_spread: spread(|s| s.rms_spread, sg),
        },
        per_realization: per,
    })
}

/// Transfer-function samples of `realizations` ensemble members at `(t, f)`.
pub fn ensemble_ctf(scn: &ValidatedScenario, t: f64, f: f64, opts: &EnsembleOptions) -> Result<Vec<Complex64>> {
    over_ensemble(opts, |i| realization(scn, i, opts.gain_model)?.snapshot(scn, t)?.ctf(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{preset_scenario, Preset};
    use crate::scenario::{validate, ScenarioConfig};
    use approx::assert_relative_eq;

    fn scenario(edit: impl FnOnce(&mut ScenarioConfig)) -> ValidatedScenario {
        let mut cfg = preset_scenario(Preset::Fig3);
        cfg.clusters.rays_per_path = 10;
        edit(&mut cfg);
        validate(cfg).unwrap()
    }

    #[test]
    fn lag_axis() {
        let l = time_lags(0.1, 0.002);
        assert_eq!(l.len(), 51);
        assert_eq!(l[0], Lag::ZERO);
        assert!((l[50].dt - 0.1).abs() < 1e-12);
    }

    #[test]
    fn zero_lag_normalizes_to_one() {
        let scn = scenario(|_| {});
        let r = acf(&scn, 0.0, 0.0, &[0.0, 0.01, 0.05], &EnsembleOptions::new(20)).unwrap();
        assert_eq!(r.normalized[0], 1.0);
        assert!(r.normalized.iter().all(|v| *v <= 1.0 + 1e-12));
        let e = empirical_acf(&scn, 0.0, 0.0, &[0.0, 0.01], &EnsembleOptions::new(20)).unwrap();
        assert_eq!(e.normalized[0], 1.0);
    }

    #[test]
    fn static_los_only_is_fully_correlated() {
        let scn = scenario(|c| {
            c.power.rice_k = f64::INFINITY;
            c.motion = Default::default();
            c.drift.v_min = 0.0;
            c.drift.v_max = 0.0;
            c.surface.amplitude = 0.0;
        });
        let r = acf(&scn, 0.0, 0.0, &[0.02, 0.05, 0.1], &EnsembleOptions::new(3)).unwrap();
        for v in r.normalized {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lag_beyond_horizon_rejected() {
        let scn = scenario(|_| {});
        let err = acf(&scn, 0.0, 0.0, &[0.2], &EnsembleOptions::new(2)).unwrap_err();
        assert!(matches!(err, Error::OutsideHorizon { .. }));
    }

    #[test]
    fn job_count_does_not_change_results() {
        let scn = scenario(|_| {});
        let lags = [0.01, 0.03];
        let a = acf(&scn, 0.0, 0.0, &lags, &EnsembleOptions::new(16).with_jobs(1)).unwrap();
        let b = acf(&scn, 0.0, 0.0, &lags, &EnsembleOptions::new(16).with_jobs(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn frequency_lag_supported() {
        let scn = scenario(|_| {});
        let lags = [Lag { dt: 0.0, df: 50.0 }, Lag { dt: 0.01, df: 50.0 }];
        let r = tfcf_monte_carlo(&scn, 0.0, 0.0, &lags, &EnsembleOptions::new(8)).unwrap();
        assert!(r.normalized.iter().all(|v| v.is_finite() && *v <= 1.0 + 1e-12));
    }

    #[test]
    fn delay_stats_examples() {
        let s = delay_stats_of(&[(0.7, 2.0)], 0.0).unwrap();
        assert_eq!((s.mean_delay, s.rms_spread), (0.7, 0.0));
        let s = delay_stats_of(&[(1.0, 1.0), (1.0 + 2.0 * 0.3, 1.0)], 0.0).unwrap();
        assert_relative_eq!(s.mean_delay, 1.3, epsilon = 1e-15);
        assert_relative_eq!(s.rms_spread, 0.3, epsilon = 1e-15);
        assert_eq!(delay_stats_of(&[(1.0, 0.0)], 0.0), Err(Error::ZeroPower));
        assert_eq!(delay_stats_of(&[], 0.0), Err(Error::ZeroPower));
    }

    #[test]
    fn cluster_pdp_counts_and_dominance() {
        let mut cfg = preset_scenario(Preset::Fig5);
        cfg.clusters.max_surface_bounces = 1;
        cfg.clusters.max_bottom_bounces = 1;
        let scn = validate(cfg).unwrap();
        let real = build_realization(&scn, 0).unwrap();
        let p = pdp(&real, &scn, 0.0, 0.0, PdpMode::Cluster).unwrap();
        assert_eq!(p.impulses.len(), 5);
        assert_eq!(p.impulses[0].label, "LoS");
        let top = p.impulses.iter().map(|i| i.power).fold(0.0, f64::max);
        assert_eq!(p.impulses[0].power, top);
        assert_eq!(p.normalized()[0].0, 0.0);
    }

    #[test]
    fn ray_pdp_matches_cluster_power() {
        let scn = validate(preset_scenario(Preset::Fig5)).unwrap();
        let real = build_realization(&scn, 0).unwrap();
        let clusters = pdp(&real, &scn, 0.0, 0.0, PdpMode::Cluster).unwrap();
        let rays = pdp(&real, &scn, 0.0, 0.0, PdpMode::Ray).unwrap();
        let a: f64 = clusters.impulses.iter().map(|i| i.power).sum();
        let b: f64 = rays.impulses.iter().map(|i| i.power).sum();
        assert_relative_eq!(a, b, max_relative = 1e-12);
        assert_eq!(rays.impulses.len(), 1 + real.ray_count());
    }

    #[test]
    fn no_los_impulse_without_rice_power() {
        let mut cfg = preset_scenario(Preset::Fig5);
        cfg.power.rice_k = 0.0;
        let scn = validate(cfg).unwrap();
        let real = build_realization(&scn, 0).unwrap();
        let p = pdp(&real, &scn, 0.0, 0.0, PdpMode::Cluster).unwrap();
        assert!(p.impulses.iter().all(|i| i.label != "LoS"));
    }

    #[test]
    fn binning_preserves_power() {
        let scn = validate(preset_scenario(Preset::Fig5)).unwrap();
        let real = build_realization(&scn, 0).unwrap();
        let p = pdp(&real, &scn, 0.0, 0.0, PdpMode::Ray).unwrap();
        let total: f64 = p.impulses.iter().map(|i| i.power).sum();
        let binned: f64 = p.binned(1e-4).iter().map(|b| b.1).sum();
        assert_relative_eq!(total, binned, max_relative = 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn impulses() -> impl Strategy<Value = Vec<(f64, f64)>> {
            prop::collection::vec((0.0f64..0.01, 0.001f64..1.0), 1..20)
        }

        proptest! {
            #[test]
            fn spread_shift_invariant(imp in impulses(), shift in -1.0f64..1.0) {
                let a = delay_stats_of(&imp, 0.0).unwrap();
                let moved: Vec<_> = imp.iter().map(|(d, p)| (d + shift, *p)).collect();
                let b = delay_stats_of(&moved, shift).unwrap();
                prop_assert!((a.rms_spread - b.rms_spread).abs() <= 1e-12);
                prop_assert!((a.mean_delay - b.mean_delay).abs() <= 1e-12);
            }

            #[test]
            fn stats_scale_invariant(imp in impulses(), g in 1e-3f64..1e3) {
                let a = delay_stats_of(&imp, 0.0).unwrap();
                let scaled: Vec<_> = imp.iter().map(|(d, p)| (*d, p * g)).collect();
                let b = delay_stats_of(&scaled, 0.0).unwrap();
                prop_assert!((a.rms_spread - b.rms_spread).abs() <= 1e-12 * a.rms_spread.max(1e-6));
                prop_assert!((a.mean_delay - b.mean_delay).abs() <= 1e-12 * a.mean_delay.max(1e-6));
            }

            #[test]
            fn mean_within_support(imp in impulses()) {
                let s = delay_stats_of(&imp, 0.0).unwrap();
                let lo = imp.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
                let hi = imp.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(s.mean_delay >= lo - 1e-15 && s.mean_delay <= hi + 1e-15);
                prop_assert!(s.rms_spread >= 0.0);
            }
        }
    }
}
