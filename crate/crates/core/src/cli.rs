//! Command-line front end.
//!
//! Every command resolves a scenario in three layers: a preset (the
//! `custom` baseline unless `--preset` is given), an optional JSON scenario
//! file merged on top of it, then individual flags. Outputs are written
//! atomically through a temporary file in the destination directory.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::channel::{build_realization, evaluate_ctf, tap_list};
use crate::error::{Error, Result};
use crate::presets::{preset_curves, preset_scenario, preset_statistic, Preset, Statistic};
use crate::scenario::{validate, ScenarioConfig, ValidatedScenario};
use crate::stats::{
    correlation, ensemble_delay_stats, pdp, time_lags, CorrelationResult, EnsembleDelayStats, EnsembleOptions,
    Estimator, PdpMode,
};

/// Reference delay statistics and their relative tolerance.
pub const TABLE1_MEAN_DELAY: f64 = 1.505e-3;
pub const TABLE1_RMS_SPREAD: f64 = 2.399e-3;
pub const TABLE1_TOLERANCE: f64 = 0.05;

#[derive(Debug, Parser)]
#[command(
    name = "uwa-channel",
    version,
    about = "Non-stationary shallow-water acoustic channel simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON scenario file merged onto the preset.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<u32>,
    /// Worker threads; 0 picks the number of CPUs.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Preset providing the base scenario.
    #[arg(long)]
    pub preset: Option<String>,
    /// Writes the resolved scenario and seed as JSON next to the output.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Writes a gnuplot script that plots the output.
    #[arg(long = "plot-script")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Anchor {
    /// Anchor instant in seconds. Defaults to the first grid instant, or the
    /// last one for `acf` so that every lag stays inside the horizon.
    #[arg(long)]
    pub time: Option<f64>,
    /// Baseband frequency offset in Hz.
    #[arg(long, default_value_t = 0.0)]
    pub freq: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EstimatorArg {
    Mc,
    Empirical,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Cluster,
    Ray,
}

impl From<ModeArg> for PdpMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Cluster => PdpMode::Cluster,
            ModeArg::Ray => PdpMode::Ray,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes H(t, f) over the scenario grids.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Writes every tap instead of the summed transfer function.
        #[arg(long)]
        taps: bool,
    },
    /// Temporal autocorrelation at one anchor.
    Acf {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        anchor: Anchor,
        #[arg(long)]
        max_lag: Option<f64>,
        #[arg(long)]
        lag_step: Option<f64>,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Mc)]
        estimator: EstimatorArg,
    },
    /// Power delay profile of one realization.
    Pdp {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        anchor: Anchor,
        #[arg(long, value_enum, default_value_t = ModeArg::Cluster)]
        mode: ModeArg,
        /// Realization index.
        #[arg(long, default_value_t = 0)]
        realization: u64,
        /// Sums impulses into bins of this width in seconds.
        #[arg(long)]
        bin_width: Option<f64>,
    },
    /// Ensemble mean and spread of the average delay and RMS delay spread.
    DelayStats {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        anchor: Anchor,
        #[arg(long, value_enum, default_value_t = ModeArg::Cluster)]
        mode: ModeArg,
    },
    /// Checks the delay statistics of the table1 preset against the reference values.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Runs a named experiment.
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Resolves preset, scenario file and flag overrides into a validated scenario.
pub fn resolve_scenario(preset: Preset, common: &Common) -> Result<ValidatedScenario> {
    let mut cfg = preset_scenario(preset);
    if let Some(path) = &common.scenario {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let patch: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let mut value = serde_json::to_value(&cfg).map_err(|e| Error::Parse(e.to_string()))?;
        merge(&mut value, patch);
        cfg = serde_json::from_value::<ScenarioConfig>(value)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    }
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = common.realizations {
        cfg.mc_realizations = n;
    }
    validate(cfg)
}

fn base_preset(common: &Common) -> Result<Preset> {
    common.preset.as_deref().map_or(Ok(Preset::Custom), str::parse)
}

fn options(scn: &ValidatedScenario, common: &Common) -> EnsembleOptions {
    EnsembleOptions::new(scn.mc_realizations).with_jobs(common.jobs)
}

/// Writes `contents` to `path` through a temporary sibling file, or to stdout.
pub fn write_atomic(path: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = path else {
        std::io::stdout().write_all(contents.as_bytes())?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

struct Output {
    csv: String,
    rows: usize,
    /// Gnuplot `using` clause for the plot companion.
    plot: &'static str,
}

fn csv_header(header: &str) -> String {
    let mut s = String::with_capacity(4096);
    s.push_str(header);
    s.push('\n');
    s
}

fn ctf_csv(scn: &ValidatedScenario, opts: &EnsembleOptions) -> Result<Output> {
    let mut csv = csv_header("t_s,f_hz,re_h,im_h,realization");
    let mut rows = 0;
    for i in 0..opts.realizations as u64 {
        let frame = evaluate_ctf(&build_realization(scn, i)?, scn)?;
        for (ti, t) in frame.times.iter().enumerate() {
            for (fi, f) in frame.freqs.iter().enumerate() {
                let h = frame.at(ti, fi);
                writeln!(csv, "{t},{f},{},{},{i}", h.re, h.im).unwrap();
                rows += 1;
            }
        }
    }
    Ok(Output {
        csv,
        rows,
        plot: "1:(sqrt($3**2+$4**2))",
    })
}

fn taps_csv(scn: &ValidatedScenario, opts: &EnsembleOptions) -> Result<Output> {
    let mut csv = csv_header("t,f,delay,re,im,path_label");
    let mut rows = 0;
    for i in 0..opts.realizations as u64 {
        let real = build_realization(scn, i)?;
        for &t in &scn.signal.time_grid {
            for &f in &scn.signal.freq_grid {
                for tap in tap_list(&real, scn, t, f)? {
                    writeln!(
                        csv,
                        "{t},{f},{},{},{},{}",
                        tap.delay, tap.amplitude.re, tap.amplitude.im, tap.label
                    )
                    .unwrap();
                    rows += 1;
                }
            }
        }
    }
    Ok(Output {
        csv,
        rows,
        plot: "3:(sqrt($4**2+$5**2))",
    })
}

fn acf_rows(csv: &mut String, curve: Option<&str>, r: &CorrelationResult) -> usize {
    let prefix = curve.map(|c| format!("{c},")).unwrap_or_default();
    for (lag, (v, n)) in r.lags.iter().zip(r.values.iter().zip(&r.normalized)) {
        writeln!(csv, "{prefix}{},{n},{},{}", lag.dt, v.re, v.im).unwrap();
    }
    r.lags.len()
}

fn delay_stats_csv(s: &EnsembleDelayStats) -> Output {
    let mut csv = csv_header("kind,mu_s,sigma_s");
    writeln!(csv, "ensemble_mean,{},{}", s.mean.mean_delay, s.mean.rms_spread).unwrap();
    writeln!(csv, "ensemble_std,{},{}", s.std.mean_delay, s.std.rms_spread).unwrap();
    Output { csv, rows: 2, plot: "" }
}

fn anchor_time(scn: &ValidatedScenario, anchor: &Anchor) -> f64 {
    anchor.time.unwrap_or_else(|| scn.horizon().0)
}

/// Delay statistics of the table1 preset and whether they meet the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Report {
    pub stats: EnsembleDelayStats,
    pub mean_ok: bool,
    pub spread_ok: bool,
}

impl Table1Report {
    pub fn passed(&self) -> bool {
        self.mean_ok && self.spread_ok
    }
}

pub fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target
}

pub fn table1_report(scn: &ValidatedScenario, jobs: usize) -> Result<Table1Report> {
    let opts = EnsembleOptions::new(scn.mc_realizations).with_jobs(jobs);
    let stats = ensemble_delay_stats(scn, 0.0, 0.0, PdpMode::Cluster, &opts)?;
    Ok(Table1Report {
        mean_ok: within(stats.mean.mean_delay, TABLE1_MEAN_DELAY, TABLE1_TOLERANCE),
        spread_ok: within(stats.mean.rms_spread, TABLE1_RMS_SPREAD, TABLE1_TOLERANCE),
        stats,
    })
}

fn run_preset(preset: Preset, scn: &ValidatedScenario, common: &Common) -> Result<Output> {
    let opts = options(scn, common);
    let curves = preset_curves(preset, scn.config());
    match preset_statistic(preset) {
        Statistic::Acf { max_lag, lag_step } => {
            let lags = time_lags(max_lag, lag_step);
            let mut csv = csv_header("curve,lag_s,abs,re,im");
            let mut rows = 0;
            for c in &curves {
                let s = validate(c.scenario.clone())?;
                let r = correlation(&s, c.anchor_time, 0.0, &lags, Estimator::MonteCarlo, &opts)?;
                rows += acf_rows(&mut csv, Some(&c.label), &r);
            }
            Ok(Output { csv, rows, plot: "2:3" })
        }
        Statistic::Pdp => {
            let mut csv = csv_header("curve,delay_s,power,label");
            let mut rows = 0;
            for c in &curves {
                let s = validate(c.scenario.clone())?;
                let p = pdp(&build_realization(&s, 0)?, &s, c.anchor_time, 0.0, PdpMode::Cluster)?;
                for (imp, (d, _)) in p.impulses.iter().zip(p.normalized()) {
                    writeln!(csv, "{},{d},{},{}", c.label, imp.power, imp.label).unwrap();
                    rows += 1;
                }
            }
            Ok(Output { csv, rows, plot: "2:3" })
        }
        Statistic::DelayStats => Ok(delay_stats_csv(&table1_report(scn, common.jobs)?.stats)),
        Statistic::Ctf => ctf_csv(
            scn,
            &EnsembleOptions::new(common.realizations.unwrap_or(1)).with_jobs(common.jobs),
        ),
    }
}

fn plot_script(out: Option<&Path>, using: &str) -> String {
    let data = out.map_or_else(|| "-".to_string(), |p| p.display().to_string());
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset grid\nplot '{data}' using {using} with linespoints\n"
    )
}

fn execute(cli: &Cli) -> Result<(Output, ValidatedScenario, Common, bool)> {
    match &cli.command {
        Command::Simulate { common, taps } => {
            let scn = resolve_scenario(base_preset(common)?, common)?;
            let opts = EnsembleOptions::new(common.realizations.unwrap_or(1)).with_jobs(common.jobs);
            let out = if *taps {
                taps_csv(&scn, &opts)?
            } else {
                ctf_csv(&scn, &opts)?
            };
            Ok((out, scn, common.clone(), true))
        }
        Command::Acf {
            common,
            anchor,
            max_lag,
            lag_step,
            estimator,
        } => {
            let preset = base_preset(common)?;
            let scn = resolve_scenario(preset, common)?;
            let (def_max, def_step) = match preset_statistic(preset) {
                Statistic::Acf { max_lag, lag_step } => (max_lag, lag_step),
                _ => {
                    let (a, b) = scn.horizon();
                    let grid = &scn.signal.time_grid;
                    let step = if grid.len() > 1 { grid[1] - grid[0] } else { 1.0 };
                    (b - a, step)
                }
            };
            let t = anchor.time.unwrap_or_else(|| scn.horizon().1);
            let est = match estimator {
                EstimatorArg::Mc => Estimator::MonteCarlo,
                EstimatorArg::Empirical => Estimator::Empirical,
            };
            let lags = time_lags(max_lag.unwrap_or(def_max), lag_step.unwrap_or(def_step));
            let r = correlation(&scn, t, anchor.freq, &lags, est, &options(&scn, common))?;
            let mut csv = csv_header("lag_s,abs,re,im");
            let rows = acf_rows(&mut csv, None, &r);
            Ok((Output { csv, rows, plot: "1:2" }, scn, common.clone(), true))
        }
        Command::Pdp {
            common,
            anchor,
            mode,
            realization,
            bin_width,
        } => {
            let scn = resolve_scenario(base_preset(common)?, common)?;
            let t = anchor_time(&scn, anchor);
            let p = pdp(
                &build_realization(&scn, *realization)?,
                &scn,
                t,
                anchor.freq,
                (*mode).into(),
            )?;
            let mut csv = csv_header("delay_s,power,label");
            let rows = match bin_width {
                Some(w) if *w > 0.0 => {
                    let bins = p.binned(*w);
                    for (d, pw) in &bins {
                        writeln!(csv, "{d},{pw},bin").unwrap();
                    }
                    bins.len()
                }
                Some(w) => {
                    return Err(Error::NonPositive {
                        quantity: "bin width",
                        value: *w,
                    })
                }
                None => {
                    for (imp, (d, _)) in p.impulses.iter().zip(p.normalized()) {
                        writeln!(csv, "{d},{},{}", imp.power, imp.label).unwrap();
                    }
                    p.impulses.len()
                }
            };
            Ok((Output { csv, rows, plot: "1:2" }, scn, common.clone(), true))
        }
        Command::DelayStats { common, anchor, mode } => {
            let scn = resolve_scenario(base_preset(common)?, common)?;
            let t = anchor_time(&scn, anchor);
            let s = ensemble_delay_stats(&scn, t, anchor.freq, (*mode).into(), &options(&scn, common))?;
            Ok((delay_stats_csv(&s), scn, common.clone(), true))
        }
        Command::Validate { common } => {
            let scn = resolve_scenario(Preset::Table1, common)?;
            let report = table1_report(&scn, common.jobs)?;
            let mut csv = delay_stats_csv(&report.stats);
            writeln!(csv.csv, "reference,{TABLE1_MEAN_DELAY},{TABLE1_RMS_SPREAD}").unwrap();
            csv.rows += 1;
            eprintln!(
                "table1: mu = {:.4} ms ({}), sigma = {:.4} ms ({})",
                report.stats.mean.mean_delay * 1e3,
                if report.mean_ok { "ok" } else { "out of tolerance" },
                report.stats.mean.rms_spread * 1e3,
                if report.spread_ok { "ok" } else { "out of tolerance" },
            );
            let passed = report.passed();
            Ok((csv, scn, common.clone(), passed))
        }
        Command::Preset { name, common } => {
            let preset: Preset = name.parse()?;
            let scn = resolve_scenario(preset, common)?;
            let out = run_preset(preset, &scn, common)?;
            Ok((out, scn, common.clone(), true))
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidConfig { .. } => "invalid_config",
        Error::Parse(_) => "parse",
        Error::OutsideHorizon { .. } => "outside_horizon",
        Error::WaterColumnBreach { .. } => "water_column_breach",
        Error::InvalidPath(_) => "invalid_path",
        Error::Grazing(_) => "grazing",
        Error::NonPositive { .. } => "non_positive",
        Error::AngleOutOfRange(_) => "angle_out_of_range",
        Error::ZeroPower => "zero_power",
        Error::UnknownPreset(_) => "unknown_preset",
        Error::Io(_) => "io",
    }
}

/// Parses `args` and runs the command; returns the process exit status.
///
/// 0 on success, 1 when `validate` finds the statistics out of tolerance,
/// 2 on any error (reported as one JSON line on stderr).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    let result = execute(&cli).and_then(|(out, scn, common, passed)| {
        write_atomic(common.out.as_deref(), &out.csv)?;
        if let Some(meta) = &common.meta {
            let doc = json!({
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "seed": scn.master_seed,
                "realizations": scn.mc_realizations,
                "scenario": scn.config(),
            });
            write_atomic(
                Some(meta),
                &(serde_json::to_string_pretty(&doc).expect("metadata serializes") + "\n"),
            )?;
        }
        if let Some(script) = &common.plot_script {
            write_atomic(Some(script), &plot_script(common.out.as_deref(), out.plot))?;
        }
        eprintln!(
            "wrote {} rows to {} in {:.2} s (seed {})",
            out.rows,
            common
                .out
                .as_ref()
                .map_or_else(|| "stdout".to_string(), |p| p.display().to_string()),
            started.elapsed().as_secs_f64(),
            scn.master_seed
        );
        Ok(passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("{}", json!({ "error": error_kind(&e), "message": e.to_string() }));
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_is_deep() {
        let mut base = json!({"a": {"x": 1, "y": 2}, "b": 3});
        merge(&mut base, json!({"a": {"y": 5}}));
        assert_eq!(base, json!({"a": {"x": 1, "y": 5}, "b": 3}));
    }

    #[test]
    fn tolerance_window() {
        assert!(within(1.505e-3 * 1.049, TABLE1_MEAN_DELAY, TABLE1_TOLERANCE));
        assert!(!within(1.505e-3 * 1.051, TABLE1_MEAN_DELAY, TABLE1_TOLERANCE));
    }

    #[test]
    fn flags_override_file_and_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        std::fs::write(&path, r#"{"master_seed": 9, "power": {"rice_k": 3.0}}"#).unwrap();
        let common = Common {
            scenario: Some(path.clone()),
            seed: Some(4),
            realizations: None,
            jobs: 0,
            out: None,
            preset: None,
            meta: None,
            plot_script: None,
        };
        let scn = resolve_scenario(Preset::Custom, &common).unwrap();
        assert_eq!(scn.master_seed, 4);
        assert_eq!(scn.power.rice_k, 3.0);
        assert_eq!(scn.power.eta_da, 0.5);

        std::fs::write(&path, r#"{"power": {"rice": 3.0}}"#).unwrap();
        assert!(matches!(
            resolve_scenario(Preset::Custom, &common),
            Err(Error::Parse(_))
        ));
    }
}
