use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use muhs_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        muhs_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn field(spec: &str, n: usize) -> *mut MuhsField {
    let s = CString::new(spec).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { muhs_field_from_spec(s.as_ptr(), n, &mut out) }, MuhsStatus::MuhsOk);
    out
}

#[test]
fn field_round_trip_and_inverse() {
    let samples: Vec<f64> = (0..32)
        .map(|j| 1.0 + (2.0 * std::f64::consts::PI * j as f64 / 32.0).cos())
        .collect();
    unsafe {
        let mut u = ptr::null_mut();
        assert_eq!(muhs_field_from_samples(samples.as_ptr(), 32, &mut u), MuhsStatus::MuhsOk);
        assert_eq!(muhs_field_len(u), 32);
        let mut m = ptr::null_mut();
        assert_eq!(muhs_apply_a(u, &mut m), MuhsStatus::MuhsOk);
        let mut back = ptr::null_mut();
        assert_eq!(muhs_apply_a_inverse(m, &mut back), MuhsStatus::MuhsOk);
        let mut buf = vec![0.0; 32];
        assert_eq!(muhs_field_samples(back, buf.as_mut_ptr(), 32), MuhsStatus::MuhsOk);
        for (a, b) in buf.iter().zip(&samples) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(
            muhs_field_samples(back, buf.as_mut_ptr(), 8),
            MuhsStatus::MuhsBufferTooSmall
        );
        assert!(last_error().contains("32"));
        muhs_field_free(u);
        muhs_field_free(m);
        muhs_field_free(back);
        muhs_field_free(ptr::null_mut());
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        let bad = CString::new("cos(1").unwrap();
        assert_eq!(muhs_field_from_spec(bad.as_ptr(), 16, &mut out), MuhsStatus::MuhsInvalidInput);
        assert!(last_error().contains("offset 5"));
        assert_eq!(
            muhs_field_from_spec(ptr::null(), 16, &mut out),
            MuhsStatus::MuhsNullPointer
        );
        let ok = CString::new("1").unwrap();
        assert_eq!(muhs_field_from_spec(ok.as_ptr(), 0, &mut out), MuhsStatus::MuhsInvalidInput);
        let (mut hi, mut mu) = (0.0, 0.0);
        assert_eq!(
            muhs_solve_period_one(1.0, MuhsWaveFamily::MuhsSmooth, 0.3, &mut hi, &mut mu),
            MuhsStatus::MuhsUnsatisfiable
        );
        assert!(muhs_last_error(ptr::null_mut(), 0) > 0);
    }
}

#[test]
fn classification_and_integration() {
    unsafe {
        let u = field("0.2 + cos(1)", 256);
        let (mut v, mut t) = (MuhsVerdict::MuhsGlobal, 0.0);
        assert_eq!(muhs_classify(u, &mut v, &mut t), MuhsStatus::MuhsOk);
        assert_eq!(v, MuhsVerdict::MuhsBlowupCertified);
        assert!((t - 1.0 / std::f64::consts::PI).abs() < 1e-10);
        let mut traj = ptr::null_mut();
        assert_eq!(muhs_integrate(u, 1.0, 0.3, &mut traj), MuhsStatus::MuhsOk);
        let (mut done, mut est, mut tf) = (7, 0.0, 0.0);
        assert_eq!(muhs_trajectory_outcome(traj, &mut done, &mut est, &mut tf), MuhsStatus::MuhsOk);
        assert_eq!(done, 0);
        assert!(est <= 1.1 / std::f64::consts::PI);
        let mut last = ptr::null_mut();
        assert_eq!(muhs_trajectory_final(traj, &mut last), MuhsStatus::MuhsOk);
        assert_eq!(muhs_field_len(last), 256);
        muhs_field_free(last);
        muhs_trajectory_free(traj);
        muhs_field_free(u);
    }
}

#[test]
fn waves_and_curvature() {
    unsafe {
        let (mut hi, mut mu) = (0.0, 0.0);
        assert_eq!(
            muhs_solve_period_one(1.0, MuhsWaveFamily::MuhsCusped, 0.3, &mut hi, &mut mu),
            MuhsStatus::MuhsOk
        );
        let (mut p, mut i) = (0.0, 0.0);
        assert_eq!(muhs_wave_stats(1.0, 0.3, hi, mu, &mut p, &mut i), MuhsStatus::MuhsOk);
        assert!((p - 1.0).abs() < 1e-10);
        assert!((i - mu).abs() < 1e-9);

        let one = field("1", 64);
        let k = 2.0 * std::f64::consts::PI;
        let v = field(&format!("{}*sin(1)", 2f64.sqrt() / k), 64);
        let mut kk = 0.0;
        assert_eq!(muhs_sectional(one, v, &mut kk), MuhsStatus::MuhsOk);
        assert!((kk - 1.0 / (k * k)).abs() < 1e-12);
        assert_eq!(muhs_sectional(one, one, &mut kk), MuhsStatus::MuhsInvalidInput);
        let small = field("1", 32);
        assert_eq!(muhs_sectional(one, small, &mut kk), MuhsStatus::MuhsInvalidInput);
        for f in [one, v, small] {
            muhs_field_free(f);
        }
        assert!(!CStr::from_ptr(muhs_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_is_valid_c() {
    let inc = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(inc.join("muhs.h")).unwrap();
    for name in ["muhs_field_from_spec", "muhs_last_error", "MUHS_UNSATISFIABLE", "muhs_sectional"] {
        assert!(header.contains(name), "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"muhs.h\"\nint main(void) { MuhsField *f = 0; return (int)muhs_field_len(f); }\n",
    )
    .unwrap();
    match Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&inc)
        .arg(&src)
        .status()
    {
        Ok(s) => assert!(s.success()),
        Err(e) => eprintln!("no C compiler available, header compile skipped: {e}"),
    }
}
