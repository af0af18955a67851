use std::ffi::{CStr, CString};
use std::ptr;

use wcdim_ffi::*;

const CANTOR: &str = "\
space 1 euclidean box [0] [1]
map L similarity 0.3333333333333333 [0] alpha const 0.3333333333333333
map R similarity 0.3333333333333333 [0.6666666666666666] alpha const 0.3333333333333333
set points 2000
set pairs 2000
";

fn parse(text: &str) -> (WcdimStatus, *mut WcdimScene) {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { wcdim_scene_parse(c.as_ptr(), &mut out) };
    (status, out)
}

fn last_error() -> String {
    let p = wcdim_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn scene_queries() {
    let (status, scene) = parse(CANTOR);
    assert_eq!(status, WcdimStatus::Ok);
    assert!(wcdim_last_error_message().is_null());
    let mut n = 0usize;
    let mut d = 0.0;
    let mut x0 = 0.0;
    unsafe {
        assert_eq!(wcdim_scene_dimension(scene, &mut n), WcdimStatus::Ok);
        assert_eq!(n, 1);
        assert_eq!(wcdim_scene_map_count(scene, &mut n), WcdimStatus::Ok);
        assert_eq!(n, 2);
        assert_eq!(wcdim_scene_diameter(scene, &mut d), WcdimStatus::Ok);
        assert_eq!(d, 1.0);
        assert_eq!(wcdim_scene_x0(scene, &mut x0), WcdimStatus::Ok);
        wcdim_scene_free(scene);
    }
    assert!((x0 - 2f64.ln() / 3f64.ln()).abs() < 1e-9);
}

#[test]
fn parse_errors_map_to_status() {
    let (status, scene) =
        parse("space 1 euclidean box [0] [1]\nmap A similarity 0.5 [0] alpha const 0.5\n");
    assert_eq!(status, WcdimStatus::ParseError);
    assert!(scene.is_null());
    assert!(last_error().contains("at least 2 maps"));

    let bad = CANTOR.replacen("alpha const 0.3333333333333333", "alpha const 1.5", 1);
    let (status, scene) = parse(&bad);
    assert_eq!(status, WcdimStatus::CoefficientError);
    assert!(scene.is_null());
}

#[test]
fn null_arguments() {
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(
            wcdim_scene_parse(ptr::null(), &mut out),
            WcdimStatus::NullPointer
        );
        let mut n = 0usize;
        assert_eq!(
            wcdim_scene_dimension(ptr::null(), &mut n),
            WcdimStatus::NullPointer
        );
        assert_eq!(
            wcdim_solve_moran(ptr::null(), 2, 0.0, &mut 0.0),
            WcdimStatus::NullPointer
        );
        wcdim_scene_free(ptr::null_mut());
        wcdim_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8() {
    let bytes = [0xffu8, 0xfe, 0];
    let mut out = ptr::null_mut();
    let status = unsafe { wcdim_scene_parse(bytes.as_ptr().cast(), &mut out) };
    assert_eq!(status, WcdimStatus::InvalidUtf8);
}

#[test]
fn moran_solver() {
    let mut x = 0.0;
    let c = [0.5, 0.5];
    assert_eq!(
        unsafe { wcdim_solve_moran(c.as_ptr(), 2, 0.0, &mut x) },
        WcdimStatus::Ok
    );
    assert_eq!(x, 1.0);
    let c = [0.5];
    assert_eq!(
        unsafe { wcdim_solve_moran(c.as_ptr(), 1, 0.0, &mut x) },
        WcdimStatus::InvalidArgument
    );
    let c = [0.5, 1.0];
    assert_eq!(
        unsafe { wcdim_solve_moran(c.as_ptr(), 2, 0.0, &mut x) },
        WcdimStatus::InvalidArgument
    );
}

#[test]
fn chaos_game_buffer() {
    let (_, scene) = parse(CANTOR);
    let mut buf = vec![0.0; 10];
    let mut written = 0usize;
    unsafe {
        assert_eq!(
            wcdim_scene_chaos_game(scene, 10, 3, buf.as_mut_ptr(), buf.len(), &mut written),
            WcdimStatus::Ok
        );
        assert_eq!(written, 10);
        assert!(buf.iter().all(|x| (0.0..=1.0).contains(x)));
        let first = buf.clone();
        wcdim_scene_chaos_game(scene, 10, 3, buf.as_mut_ptr(), buf.len(), &mut written);
        assert_eq!(first, buf);
        assert_eq!(
            wcdim_scene_chaos_game(scene, 11, 3, buf.as_mut_ptr(), buf.len(), &mut written),
            WcdimStatus::BufferTooSmall
        );
        assert_eq!(written, 0);
        wcdim_scene_free(scene);
    }
}

#[test]
fn verify_json_is_deterministic() {
    let (_, scene) = parse(CANTOR);
    let run = || unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(wcdim_scene_verify_json(scene, &mut s), WcdimStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_owned();
        wcdim_string_free(s);
        text
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.contains("\"schema\": 1"));
    unsafe { wcdim_scene_free(scene) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(wcdim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
