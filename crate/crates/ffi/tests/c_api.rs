use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use roadlab_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = roadlab_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    roadlab_string_free(p);
    s
}

fn braess() -> *mut RoadlabSession {
    let mut s = ptr::null_mut();
    let status = unsafe { roadlab_session_from_dataset(c("braess").as_ptr(), &mut s) };
    assert_eq!(status, RoadlabStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn close_road_round_trip() {
    let s = braess();
    unsafe {
        let mut child = 0u64;
        let m = c(r#"{"kind":"close_road","road":3}"#);
        assert_eq!(roadlab_apply_modification(s, 0, m.as_ptr(), &mut child), RoadlabStatus::Ok);
        assert_eq!(child, 1);

        let (mut vi, mut vp, mut applicable) = (0.0, 0.0, false);
        assert_eq!(roadlab_metric_deltas(s, child, &mut vi, &mut vp, &mut applicable), RoadlabStatus::Ok);
        assert!(applicable);
        assert!((vi - 0.26).abs() < 0.01, "improvement {vi}");
        assert_eq!(vi, vp);

        assert_eq!(roadlab_metric_deltas(s, 0, &mut vi, &mut vp, &mut applicable), RoadlabStatus::Ok);
        assert_eq!((vi, vp, applicable), (0.0, 0.0, false));

        let (mut step, mut total) = (1.0, 1.0);
        assert_eq!(roadlab_state_cost(s, child, &mut step, &mut total), RoadlabStatus::Ok);
        assert_eq!((step, total), (0.0, 0.0));

        let mut doc = ptr::null_mut();
        assert_eq!(roadlab_session_export(s, &mut doc), RoadlabStatus::Ok);
        let doc = take_string(doc);

        let mut copy = ptr::null_mut();
        assert_eq!(roadlab_session_import(c(&doc).as_ptr(), &mut copy), RoadlabStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(roadlab_session_export(copy, &mut again), RoadlabStatus::Ok);
        assert_eq!(take_string(again), doc);

        let (mut m0, mut m1) = (0.0, 0.0);
        assert_eq!(roadlab_state_metric(s, child, &mut m0), RoadlabStatus::Ok);
        assert_eq!(roadlab_state_metric(copy, child, &mut m1), RoadlabStatus::Ok);
        assert_eq!(m0, m1);

        roadlab_session_free(copy);
        roadlab_session_free(s);
    }
}

#[test]
fn errors_are_reported() {
    let s = braess();
    unsafe {
        let mut child = 0u64;
        let bad_road = c(r#"{"kind":"close_road","road":42}"#);
        assert_eq!(
            roadlab_apply_modification(s, 0, bad_road.as_ptr(), &mut child),
            RoadlabStatus::InvalidModification
        );
        assert!(last_error().contains("42"));

        let garbage = c("{not json");
        assert_eq!(
            roadlab_apply_modification(s, 0, garbage.as_ptr(), &mut child),
            RoadlabStatus::InvalidModification
        );

        let close = c(r#"{"kind":"close_road","road":1}"#);
        assert_eq!(roadlab_apply_modification(s, 9, close.as_ptr(), &mut child), RoadlabStatus::UnknownState);

        // roads 1 and 2 both leave the origin
        assert_eq!(roadlab_apply_modification(s, 0, close.as_ptr(), &mut child), RoadlabStatus::Ok);
        let close2 = c(r#"{"kind":"close_road","road":2}"#);
        assert_eq!(
            roadlab_apply_modification(s, child, close2.as_ptr(), &mut child),
            RoadlabStatus::Unreachable
        );
        assert!(last_error().contains("1->4"));

        assert_eq!(roadlab_delete_state(s, 0, ptr::null_mut()), RoadlabStatus::RootDeletion);
        let mut removed = 0usize;
        assert_eq!(roadlab_delete_state(s, 1, &mut removed), RoadlabStatus::Ok);
        assert_eq!(removed, 1);

        let mut metric = 0.0;
        assert_eq!(roadlab_state_metric(ptr::null(), 0, &mut metric), RoadlabStatus::NullPointer);
        assert_eq!(roadlab_state_metric(s, 0, ptr::null_mut()), RoadlabStatus::NullPointer);

        let invalid = [0xffu8, 0];
        let mut other = ptr::null_mut();
        assert_eq!(
            roadlab_session_from_dataset(invalid.as_ptr() as *const c_char, &mut other),
            RoadlabStatus::InvalidUtf8
        );
        assert_eq!(
            roadlab_session_from_dataset(c("atlantis").as_ptr(), &mut other),
            RoadlabStatus::InvalidArgument
        );
        assert!(other.is_null());

        assert_eq!(roadlab_set_cost_params(s, -1.0, 1.0), RoadlabStatus::InvalidArgument);
        assert_eq!(roadlab_session_import(c("{}").as_ptr(), &mut other), RoadlabStatus::InvalidSession);

        // success clears the message
        assert_eq!(roadlab_state_metric(s, 0, &mut metric), RoadlabStatus::Ok);
        assert!(roadlab_last_error_message().is_null());
        roadlab_session_free(s);
    }
}

#[test]
fn session_from_text_and_costs() {
    let net = "<NUMBER OF NODES> 3\n<NUMBER OF LINKS> 2\n<END OF METADATA>\n1 2 100 1.5 2 0.15 4\n2 3 100 2 3 0.15 4\n";
    let trips = "<NUMBER OF ZONES> 3\n<END OF METADATA>\nOrigin 1\n 3 : 50;\n";
    let coords = "node x y\n1 0 0\n2 1.5 0\n3 3.5 0\n";
    unsafe {
        let mut s = ptr::null_mut();
        let status = roadlab_session_new(
            c(net).as_ptr(),
            c(trips).as_ptr(),
            c(coords).as_ptr(),
            c("planar").as_ptr(),
            &mut s,
        );
        assert_eq!(status, RoadlabStatus::Ok, "{}", last_error());

        assert_eq!(roadlab_set_cost_params(s, 1e6, 2e6), RoadlabStatus::Ok);
        let mut child = 0;
        let m = c(r#"{"kind":"build_road","from":1,"to":3,"two_way":false}"#);
        assert_eq!(roadlab_apply_modification(s, 0, m.as_ptr(), &mut child), RoadlabStatus::Ok);
        let (mut step, mut total) = (0.0, 0.0);
        assert_eq!(roadlab_state_cost(s, child, &mut step, &mut total), RoadlabStatus::Ok);
        // 3.5 km of surface road at 1M per km
        assert!((step - 3.5e6).abs() < 1e-6, "{step}");
        assert_eq!(step, total);

        let mut json = ptr::null_mut();
        assert_eq!(roadlab_state_json(s, child, &mut json), RoadlabStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(v["roads"].as_array().unwrap().len(), 3);
        assert_eq!(v["roads"][2]["new_road"], true);

        let mut tree = ptr::null_mut();
        assert_eq!(roadlab_tree_json(s, &mut tree), RoadlabStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take_string(tree)).unwrap();
        assert_eq!(v["states"].as_array().unwrap().len(), 2);

        let mut bad = ptr::null_mut();
        let truncated = &net[..net.len() - 20];
        assert_eq!(
            roadlab_session_new(c(truncated).as_ptr(), c(trips).as_ptr(), ptr::null(), ptr::null(), &mut bad),
            RoadlabStatus::Parse
        );
        assert!(last_error().contains("line"));
        roadlab_session_free(s);
    }
}

#[test]
fn bpr() {
    let mut t = 0.0;
    unsafe {
        assert_eq!(roadlab_bpr_time(10.0, 100.0, 100.0, &mut t), RoadlabStatus::Ok);
        assert_eq!(t, 11.5);
        assert_eq!(roadlab_bpr_time(10.0, 0.0, 1.0, &mut t), RoadlabStatus::InvalidArgument);
        assert_eq!(roadlab_bpr_time(10.0, 1.0, 1.0, ptr::null_mut()), RoadlabStatus::NullPointer);
    }
    unsafe { roadlab_session_free(ptr::null_mut()) };
    unsafe { roadlab_string_free(ptr::null_mut()) };
}
