use std::ffi::{CStr, CString};
use std::ptr;

use schoenloc_ffi::*;

fn last_error() -> String {
    let p = sl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn transform(s: &str) -> *mut SlTransform {
    let c = CString::new(s).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { sl_transform_parse(c.as_ptr(), &mut t) }, SlStatus::Ok);
    t
}

fn line(xs: &[f64]) -> *mut SlDataset {
    let mut ds = ptr::null_mut();
    let st = unsafe { sl_dataset_from_points(xs.as_ptr(), xs.len(), 1, ptr::null(), &mut ds) };
    assert_eq!(st, SlStatus::Ok);
    ds
}

#[test]
fn identity_estimate_of_three_points_is_their_mean() {
    let ds = line(&[0.0, 1.0, 5.0]);
    let t = transform("identity");
    let mut r = ptr::null_mut();
    unsafe {
        assert_eq!(sl_estimate(ds, t, ptr::null(), &mut r), SlStatus::Ok);
        assert_eq!(sl_result_converged(r), 1);
        let mut c = [0.0];
        assert_eq!(sl_result_centroid(ds, r, c.as_mut_ptr(), 1), SlStatus::Ok);
        assert!((c[0] - 2.0).abs() < 1e-12);
        // Γ at the mean is the variance
        let var = (4.0 + 1.0 + 9.0) / 3.0;
        assert!((sl_result_gamma(r) - var).abs() < 1e-12);
        let mut alpha = [0.0; 3];
        assert_eq!(sl_result_alpha(r, alpha.as_mut_ptr(), 3), SlStatus::Ok);
        assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        sl_result_free(r);
        sl_transform_free(t);
        sl_dataset_free(ds);
    }
}

#[test]
fn distances_and_points_agree() {
    let xs = [0.0, 1.0, 2.0, 7.0];
    let d: Vec<f64> = xs
        .iter()
        .flat_map(|a| xs.iter().map(move |b| (a - b) * (a - b)))
        .collect();
    let w = [1.0, 2.0, 3.0, 4.0];
    let t = transform("exp:delta=4");
    unsafe {
        let mut from_d = ptr::null_mut();
        assert_eq!(sl_dataset_from_distances(d.as_ptr(), 4, w.as_ptr(), &mut from_d), SlStatus::Ok);
        let mut from_x = ptr::null_mut();
        assert_eq!(sl_dataset_from_points(xs.as_ptr(), 4, 1, w.as_ptr(), &mut from_x), SlStatus::Ok);
        let (mut r1, mut r2) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(sl_estimate(from_d, t, ptr::null(), &mut r1), SlStatus::Ok);
        assert_eq!(sl_estimate(from_x, t, ptr::null(), &mut r2), SlStatus::Ok);
        assert!((sl_result_gamma(r1) - sl_result_gamma(r2)).abs() < 1e-12);
        // distance input has no coordinates to project on
        let mut c = [0.0];
        assert_eq!(sl_result_centroid(from_d, r1, c.as_mut_ptr(), 1), SlStatus::NotApplicable);
        sl_result_free(r1);
        sl_result_free(r2);
        sl_dataset_free(from_d);
        sl_dataset_free(from_x);
        sl_transform_free(t);
    }
}

#[test]
fn concentrated_regime_reports_the_observation() {
    let ds = line(&[0.0, 0.0, 0.0, 1.0, 3.0]);
    let t = transform("power:q=0.2");
    unsafe {
        assert_eq!(sl_dataset_aggregate(ds, 1e-12), SlStatus::Ok);
        assert_eq!(sl_dataset_len(ds), 3);
        let mut opts = sl_options_default();
        opts.multi_start = 1;
        let mut r = ptr::null_mut();
        assert_eq!(sl_estimate(ds, t, &opts, &mut r), SlStatus::Ok);
        let (mut regime, mut index) = (SlRegime::Distributed, 0usize);
        assert_eq!(sl_result_regime(r, &mut regime, &mut index), SlStatus::Ok);
        assert_eq!(regime, SlRegime::Concentrated);
        assert_eq!(index, 0);
        assert_eq!(sl_result_entropy(r), 0.0);
        sl_result_free(r);
        sl_dataset_free(ds);
        sl_transform_free(t);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let bad = CString::new("power:q=2").unwrap();
        let mut t = ptr::null_mut();
        assert_eq!(sl_transform_parse(bad.as_ptr(), &mut t), SlStatus::InvalidArgument);
        assert!(t.is_null());
        assert!(last_error().contains("exponent"));

        let junk = CString::new("wobbly").unwrap();
        assert_eq!(sl_transform_parse(junk.as_ptr(), &mut t), SlStatus::Parse);

        assert_eq!(sl_transform_parse(ptr::null(), &mut t), SlStatus::NullPointer);

        let asym = [0.0, 1.0, 2.0, 0.0];
        let mut ds = ptr::null_mut();
        assert_eq!(sl_dataset_from_distances(asym.as_ptr(), 2, ptr::null(), &mut ds), SlStatus::InvalidArgument);
        assert!(!last_error().is_empty());

        let neg_w = [1.0, -1.0];
        let xs = [0.0, 1.0];
        assert_eq!(sl_dataset_from_points(xs.as_ptr(), 2, 1, neg_w.as_ptr(), &mut ds), SlStatus::InvalidArgument);

        let ds = line(&[0.0, 1.0, 2.0]);
        let t = transform("identity");
        let mut r = ptr::null_mut();
        assert_eq!(sl_estimate(ds, t, ptr::null(), &mut r), SlStatus::Ok);
        let mut small = [0.0; 2];
        assert_eq!(sl_result_alpha(r, small.as_mut_ptr(), 2), SlStatus::BufferTooSmall);
        assert_eq!(sl_estimate(ptr::null(), t, ptr::null(), &mut r), SlStatus::NullPointer);
        sl_result_free(r);
        sl_dataset_free(ds);
        sl_transform_free(t);
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        sl_dataset_free(ptr::null_mut());
        sl_transform_free(ptr::null_mut());
        sl_result_free(ptr::null_mut());
        assert_eq!(sl_dataset_len(ptr::null()), 0);
        assert!(sl_result_gamma(ptr::null()).is_nan());
        assert_eq!(sl_result_converged(ptr::null()), 0);
    }
}

#[test]
fn phi_and_version() {
    let t = transform("log:delta=1");
    let mut v = 0.0;
    unsafe {
        assert_eq!(sl_transform_phi(t, std::f64::consts::E - 1.0, &mut v), SlStatus::Ok);
        assert_eq!(sl_transform_phi(t, -1.0, &mut v), SlStatus::InvalidArgument);
        sl_transform_free(t);
    }
    assert!((v - 1.0).abs() < 1e-15);
    let version = unsafe { CStr::from_ptr(sl_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn errors_are_per_thread() {
    let junk = CString::new("wobbly").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { sl_transform_parse(junk.as_ptr(), &mut t) }, SlStatus::Parse);
    let other = std::thread::spawn(|| sl_last_error().is_null()).join().unwrap();
    assert!(other);
}
