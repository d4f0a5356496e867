//! C interface to the uwa-channel simulator.
//!
//! Scenarios and realizations are opaque handles created and released
//! through this API. Every fallible call returns a [`UwaStatus`]; on failure
//! [`uwa_last_error`] describes what went wrong on the calling thread.
//! Panics never cross the boundary and surface as [`UwaStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;
use uwa_channel::stats::{acf, ensemble_delay_stats, EnsembleOptions, PdpMode};
use uwa_channel::{
    build_realization, evaluate_ctf, preset_scenario, validate, ChannelRealization, Preset, ScenarioConfig,
    ValidatedScenario,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UwaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidConfig = 4,
    OutsideHorizon = 5,
    Geometry = 6,
    Numeric = 7,
    UnknownPreset = 8,
    BufferTooSmall = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UwaComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UwaPdpMode {
    Cluster = 0,
    Ray = 1,
}

/// Ensemble delay statistics in seconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UwaDelayStats {
    pub mean_delay: f64,
    pub rms_spread: f64,
    pub mean_delay_std: f64,
    pub rms_spread_std: f64,
}

/// Validated scenario.
pub struct UwaScenario {
    inner: ValidatedScenario,
}

/// One frozen draw of the random channel.
pub struct UwaRealization {
    inner: ChannelRealization,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: UwaStatus,
    message: String,
}

impl Failure {
    fn new(status: UwaStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<uwa_channel::Error> for Failure {
    fn from(e: uwa_channel::Error) -> Self {
        use uwa_channel::Error as E;
        let status = match &e {
            E::InvalidConfig { .. } => UwaStatus::InvalidConfig,
            E::Parse(_) => UwaStatus::Parse,
            E::OutsideHorizon { .. } => UwaStatus::OutsideHorizon,
            E::WaterColumnBreach { .. } | E::InvalidPath(_) | E::Grazing(_) | E::AngleOutOfRange(_) => {
                UwaStatus::Geometry
            }
            E::NonPositive { .. } | E::ZeroPower => UwaStatus::Numeric,
            E::UnknownPreset(_) => UwaStatus::UnknownPreset,
            E::Io(_) => UwaStatus::Io,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: Option<String>) {
    let text = message.map(|m| CString::new(m.replace('\0', " ")).unwrap_or_default());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> UwaStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        let what = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure::new(UwaStatus::Panic, format!("panic: {what}")))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            UwaStatus::Ok
        }
        Err(f) => {
            set_last_error(Some(f.message));
            f.status
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(UwaStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(UwaStatus::NullPointer, format!("{what} is null")))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(UwaStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(UwaStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn boxed_scenario(cfg: ScenarioConfig) -> Result<*mut UwaScenario, Failure> {
    let inner = validate(cfg)?;
    Ok(Box::into_raw(Box::new(UwaScenario { inner })))
}

/// Message describing the last failure on this thread, or null after a
/// successful call. The pointer stays valid until the next call into this
/// library from the same thread.
#[no_mangle]
pub extern "C" fn uwa_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses and validates a JSON scenario.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uwa_scenario_from_json(json: *const c_char, out: *mut *mut UwaScenario) -> UwaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = ScenarioConfig::from_json(read_str(json, "json")?)?;
        *out = boxed_scenario(cfg)?;
        Ok(())
    })
}

/// Builds one of the named preset scenarios ("fig3", "table1", ...).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn uwa_scenario_preset(name: *const c_char, out: *mut *mut UwaScenario) -> UwaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let preset: Preset = read_str(name, "name")?.parse()?;
        *out = boxed_scenario(preset_scenario(preset))?;
        Ok(())
    })
}

/// Serializes the scenario to JSON. Release the string with
/// [`uwa_string_free`].
///
/// # Safety
/// `scenario` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uwa_scenario_to_json(scenario: *const UwaScenario, out: *mut *mut c_char) -> UwaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let json = deref(scenario, "scenario")?.inner.config().to_json();
        *out = CString::new(json)
            .map_err(|e| Failure::new(UwaStatus::InvalidUtf8, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Number of instants and frequencies in the scenario's evaluation grid.
///
/// # Safety
/// `scenario` must come from this library; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn uwa_scenario_grid_size(
    scenario: *const UwaScenario,
    n_times: *mut usize,
    n_freqs: *mut usize,
) -> UwaStatus {
    guard(|| {
        let scn = &deref(scenario, "scenario")?.inner;
        *out_ref(n_times, "n_times")? = scn.signal.time_grid.len();
        *out_ref(n_freqs, "n_freqs")? = scn.signal.freq_grid.len();
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uwa_scenario_free(scenario: *mut UwaScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uwa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Draws realization `index` of the scenario's ensemble.
///
/// # Safety
/// `scenario` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uwa_realization_new(
    scenario: *const UwaScenario,
    index: u64,
    out: *mut *mut UwaRealization,
) -> UwaStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let inner = build_realization(&deref(scenario, "scenario")?.inner, index)?;
        *out = Box::into_raw(Box::new(UwaRealization { inner }));
        Ok(())
    })
}

/// # Safety
/// `realization` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uwa_realization_free(realization: *mut UwaRealization) {
    if !realization.is_null() {
        drop(Box::from_raw(realization));
    }
}

/// Channel transfer function at time `t` and baseband offset `f`.
///
/// # Safety
/// Handles must come from this library, the realization built from the
/// same scenario; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uwa_ctf(
    realization: *const UwaRealization,
    scenario: *const UwaScenario,
    t: f64,
    f: f64,
    out: *mut UwaComplex,
) -> UwaStatus {
    guard(|| {
        let real = &deref(realization, "realization")?.inner;
        let scn = &deref(scenario, "scenario")?.inner;
        let h = real.snapshot(scn, t)?.ctf(f)?;
        *out_ref(out, "out")? = UwaComplex { re: h.re, im: h.im };
        Ok(())
    })
}

/// Evaluates the CTF over the scenario grid into `buf`, row-major with one
/// row per instant. `len` must be at least `n_times * n_freqs`.
///
/// # Safety
/// Handles must come from this library; `buf` must hold `len` writable
/// elements.
#[no_mangle]
pub unsafe extern "C" fn uwa_ctf_frame(
    realization: *const UwaRealization,
    scenario: *const UwaScenario,
    buf: *mut UwaComplex,
    len: usize,
) -> UwaStatus {
    guard(|| {
        let real = &deref(realization, "realization")?.inner;
        let scn = &deref(scenario, "scenario")?.inner;
        let needed = scn.signal.time_grid.len() * scn.signal.freq_grid.len();
        if len < needed {
            return Err(Failure::new(
                UwaStatus::BufferTooSmall,
                format!("buffer holds {len} values, frame needs {needed}"),
            ));
        }
        if buf.is_null() {
            return Err(Failure::new(UwaStatus::NullPointer, "buf is null"));
        }
        let frame = evaluate_ctf(real, scn)?;
        let dst = std::slice::from_raw_parts_mut(buf, needed);
        for (d, h) in dst.iter_mut().zip(&frame.values) {
            *d = UwaComplex { re: h.re, im: h.im };
        }
        Ok(())
    })
}

/// Normalized Monte-Carlo time autocorrelation `|R(dt)| / |R(0)|` at the
/// anchor `(t, f)` for each of the `n` lags in `dts`, written to `out`.
/// `jobs = 0` uses the global thread pool.
///
/// # Safety
/// `dts` and `out` must each hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn uwa_acf(
    scenario: *const UwaScenario,
    t: f64,
    f: f64,
    dts: *const f64,
    n: usize,
    realizations: u32,
    jobs: usize,
    out: *mut f64,
) -> UwaStatus {
    guard(|| {
        let scn = &deref(scenario, "scenario")?.inner;
        if n > 0 && (dts.is_null() || out.is_null()) {
            return Err(Failure::new(UwaStatus::NullPointer, "dts or out is null"));
        }
        if n == 0 {
            return Ok(());
        }
        let lags = std::slice::from_raw_parts(dts, n);
        let opts = EnsembleOptions::new(realizations).with_jobs(jobs);
        let r = acf(scn, t, f, lags, &opts)?;
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&r.normalized);
        Ok(())
    })
}

/// Ensemble mean delay and RMS delay spread at `(t, f)`.
///
/// # Safety
/// `scenario` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn uwa_delay_stats(
    scenario: *const UwaScenario,
    t: f64,
    f: f64,
    mode: UwaPdpMode,
    realizations: u32,
    jobs: usize,
    out: *mut UwaDelayStats,
) -> UwaStatus {
    guard(|| {
        let scn = &deref(scenario, "scenario")?.inner;
        let mode = match mode {
            UwaPdpMode::Cluster => PdpMode::Cluster,
            UwaPdpMode::Ray => PdpMode::Ray,
        };
        let opts = EnsembleOptions::new(realizations).with_jobs(jobs);
        let s = ensemble_delay_stats(scn, t, f, mode, &opts)?;
        *out_ref(out, "out")? = UwaDelayStats {
            mean_delay: s.mean.mean_delay,
            rms_spread: s.mean.rms_spread,
            mean_delay_std: s.std.mean_delay,
            rms_spread_std: s.std.rms_spread,
        };
        Ok(())
    })
}
