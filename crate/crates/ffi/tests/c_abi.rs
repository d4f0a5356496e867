use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use uwa_channel_ffi::*;

fn preset(name: &str) -> *mut UwaScenario {
    let name = CString::new(name).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { uwa_scenario_preset(name.as_ptr(), &mut out) }, UwaStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = uwa_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn frame_matches_point_evaluation() {
    let scn = preset("custom");
    let (mut nt, mut nf) = (0usize, 0usize);
    unsafe {
        assert_eq!(uwa_scenario_grid_size(scn, &mut nt, &mut nf), UwaStatus::Ok);
        assert!(nt > 0 && nf > 0);
        let mut real = ptr::null_mut();
        assert_eq!(uwa_realization_new(scn, 3, &mut real), UwaStatus::Ok);

        let mut buf = vec![UwaComplex::default(); nt * nf];
        assert_eq!(
            uwa_ctf_frame(real, scn, buf.as_mut_ptr(), buf.len() - 1),
            UwaStatus::BufferTooSmall
        );
        assert!(last_error().contains("needs"));
        assert_eq!(uwa_ctf_frame(real, scn, buf.as_mut_ptr(), buf.len()), UwaStatus::Ok);
        assert!(uwa_last_error().is_null());

        let json = {
            let mut s = ptr::null_mut();
            assert_eq!(uwa_scenario_to_json(scn, &mut s), UwaStatus::Ok);
            let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
            uwa_string_free(s);
            text
        };
        let cfg: serde_json::Value = serde_json::from_str(&json).unwrap();
        let t = cfg["signal"]["time_grid"][nt - 1].as_f64().unwrap();
        let f = cfg["signal"]["freq_grid"][nf - 1].as_f64().unwrap();
        let mut h = UwaComplex::default();
        assert_eq!(uwa_ctf(real, scn, t, f, &mut h), UwaStatus::Ok);
        assert_eq!(h, buf[nt * nf - 1]);

        assert_eq!(uwa_ctf(real, scn, 1e6, 0.0, &mut h), UwaStatus::OutsideHorizon);
        uwa_realization_free(real);
        uwa_scenario_free(scn);
    }
}

#[test]
fn json_round_trip_and_errors() {
    let scn = preset("fig5");
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(uwa_scenario_to_json(scn, &mut s), UwaStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(uwa_scenario_from_json(s, &mut again), UwaStatus::Ok);
        uwa_string_free(s);
        uwa_scenario_free(again);
        uwa_scenario_free(scn);

        let bad = CString::new("{not json").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(uwa_scenario_from_json(bad.as_ptr(), &mut out), UwaStatus::Parse);
        assert!(out.is_null());
        assert!(!last_error().is_empty());

        let name = CString::new("fig9").unwrap();
        assert_eq!(uwa_scenario_preset(name.as_ptr(), &mut out), UwaStatus::UnknownPreset);
        assert!(last_error().contains("fig9"));

        assert_eq!(uwa_scenario_from_json(ptr::null(), &mut out), UwaStatus::NullPointer);
        let mut h = UwaComplex::default();
        assert_eq!(
            uwa_ctf(ptr::null(), ptr::null(), 0.0, 0.0, &mut h),
            UwaStatus::NullPointer
        );

        uwa_scenario_free(ptr::null_mut());
        uwa_realization_free(ptr::null_mut());
        uwa_string_free(ptr::null_mut());
    }
}

#[test]
fn ensemble_statistics() {
    let scn = preset("fig3");
    unsafe {
        let dts = [0.0, 0.01, 0.02];
        let mut out = [0.0; 3];
        assert_eq!(
            uwa_acf(scn, 0.0, 0.0, dts.as_ptr(), 3, 20, 1, out.as_mut_ptr()),
            UwaStatus::Ok
        );
        assert_eq!(out[0], 1.0);
        assert!(out.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
        let mut again = [0.0; 3];
        assert_eq!(
            uwa_acf(scn, 0.0, 0.0, dts.as_ptr(), 3, 20, 2, again.as_mut_ptr()),
            UwaStatus::Ok
        );
        assert_eq!(out, again);
        uwa_scenario_free(scn);
    }

    let scn = preset("table1");
    unsafe {
        let mut stats = UwaDelayStats::default();
        assert_eq!(
            uwa_delay_stats(scn, 0.0, 0.0, UwaPdpMode::Cluster, 5, 1, &mut stats),
            UwaStatus::Ok
        );
        assert!(stats.mean_delay > 0.0 && stats.rms_spread > 0.0);
        assert_eq!(
            uwa_delay_stats(scn, 0.0, 0.0, UwaPdpMode::Ray, 0, 1, &mut stats),
            UwaStatus::InvalidConfig
        );
        uwa_scenario_free(scn);
    }
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/uwa_channel.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "uwa_last_error",
        "uwa_scenario_from_json",
        "uwa_scenario_preset",
        "uwa_scenario_free",
        "uwa_realization_new",
        "uwa_realization_free",
        "uwa_ctf_frame",
        "uwa_acf",
        "uwa_delay_stats",
        "typedef struct UwaScenario UwaScenario;",
        "UWA_STATUS_BUFFER_TOO_SMALL = 9",
    ] {
        assert!(text.contains(symbol), "header lacks {symbol}");
    }

    let Ok(status) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler found, skipping header compile check");
        return;
    };
    assert!(status.success());
}
