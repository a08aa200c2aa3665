//! Exercise the C ABI the way a foreign caller would: through the exported
//! extern "C" functions with C strings and raw pointers.

use skellamk_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn parse(name: &str, params: &str) -> *mut SkProcess {
    let name = CString::new(name).unwrap();
    let params = CString::new(params).unwrap();
    let mut handle: *mut SkProcess = ptr::null_mut();
    let status = unsafe { skellamk_process_parse(name.as_ptr(), params.as_ptr(), &mut handle) };
    assert_eq!(status, SkStatus::Ok);
    assert!(!handle.is_null());
    handle
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(skellamk_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn pmf_through_the_c_surface() {
    let p = parse("skellam", "l1=1,l2=1");
    let mut value = 0.0f64;
    let status = unsafe { skellamk_pmf(p, 1.0, 0, 1e-10, &mut value) };
    assert_eq!(status, SkStatus::Ok);
    assert!((value - 0.308_508_3).abs() < 1e-7, "{value}");
    unsafe { skellamk_process_free(p) };
}

#[test]
fn table_handle_lifecycle() {
    let p = parse("spok", "k=2,l1=1,l2=1");
    let mut table: *mut SkPmfTable = ptr::null_mut();
    let status = unsafe { skellamk_pmf_table_new(p, 1.0, 1e-9, &mut table) };
    assert_eq!(status, SkStatus::Ok);
    unsafe {
        let lo = skellamk_pmf_table_lo(table);
        let hi = skellamk_pmf_table_hi(table);
        assert!(lo < 0 && hi > 0);
        let mut total = 0.0;
        for m in lo..=hi {
            total += skellamk_pmf_table_prob(table, m);
        }
        assert!((total + skellamk_pmf_table_bound(table) - 1.0).abs() < 1e-8);
        skellamk_pmf_table_free(table);
        skellamk_process_free(p);
    }
}

#[test]
fn moments_and_errors() {
    let p = parse("ppok", "k=3,l1=1");
    let (mut mean, mut var) = (0.0f64, 0.0f64);
    let status = unsafe { skellamk_moments(p, 2.0, &mut mean, &mut var) };
    assert_eq!(status, SkStatus::Ok);
    assert_eq!(mean, 12.0);
    assert_eq!(var, 28.0);
    unsafe { skellamk_process_free(p) };

    // stable-subordinated moments are unsupported and must say so
    let p = parse("sfpp", "alpha=0.5,l1=1");
    let status = unsafe { skellamk_moments(p, 1.0, &mut mean, &mut var) };
    assert_eq!(status, SkStatus::UnsupportedFamily);
    let mut buf = vec![0i8; 256];
    let len = unsafe { skellamk_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(len > 0);
    let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert!(msg.contains("unsupported"), "{msg}");
    unsafe { skellamk_process_free(p) };
}

#[test]
fn parse_errors_set_messages() {
    let name = CString::new("noprocess").unwrap();
    let params = CString::new("").unwrap();
    let mut handle: *mut SkProcess = ptr::null_mut();
    let status = unsafe { skellamk_process_parse(name.as_ptr(), params.as_ptr(), &mut handle) };
    assert_eq!(status, SkStatus::ParseError);
    assert!(handle.is_null());
}

#[test]
fn json_construction_and_simulation() {
    let json = CString::new(r#"{"family":"spok","k":2,"lambda1":1.0,"lambda2":0.5}"#).unwrap();
    let mut p: *mut SkProcess = ptr::null_mut();
    let status = unsafe { skellamk_process_from_json(json.as_ptr(), &mut p) };
    assert_eq!(status, SkStatus::Ok);

    let dir = std::env::temp_dir().join(format!("skellamk-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("path.csv");
    let path = CString::new(out.to_str().unwrap()).unwrap();
    let status = unsafe { skellamk_simulate_csv(p, 2.0, 42, path.as_ptr()) };
    assert_eq!(status, SkStatus::Ok);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,value\n0,0\n"));

    let mut v = f64::NAN;
    let status = unsafe { skellamk_sample_terminal(p, 1.0, 7, 0, &mut v) };
    assert_eq!(status, SkStatus::Ok);
    assert!(v.is_finite() && v.fract() == 0.0);
    unsafe { skellamk_process_free(p) };
}
