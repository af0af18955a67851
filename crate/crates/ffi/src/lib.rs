//! C ABI for `wcdim`.
//!
//! Scenes are opaque handles created by [`wcdim_scene_parse`] and released
//! with [`wcdim_scene_free`]. Every fallible call returns a [`WcdimStatus`];
//! on failure a description is available from [`wcdim_last_error_message`]
//! on the same thread. Strings returned by the library must be released with
//! [`wcdim_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wcdim::attractor::{chaos_game, ChaosGameOptions};
use wcdim::moran::MoranProblem;
use wcdim::report;
use wcdim::scene::{parse_scene, SceneConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WcdimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    CoefficientError = 4,
    InvalidArgument = 5,
    BufferTooSmall = 6,
    ComputationError = 7,
    Panic = 8,
}

/// Parsed scene. Opaque to C.
pub struct WcdimScene {
    config: SceneConfig,
    text: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (WcdimStatus, String)>) -> WcdimStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WcdimStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            WcdimStatus::Panic
        }
    }
}

fn null() -> (WcdimStatus, String) {
    (WcdimStatus::NullPointer, "null pointer argument".into())
}

unsafe fn scene_ref<'a>(scene: *const WcdimScene) -> Result<&'a WcdimScene, (WcdimStatus, String)> {
    scene.as_ref().ok_or_else(null)
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn wcdim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wcdim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses NUL-terminated scene text into a new handle stored in `*out`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_parse(
    text: *const c_char,
    out: *mut *mut WcdimScene,
) -> WcdimStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (WcdimStatus::InvalidUtf8, e.to_string()))?;
        let config = parse_scene(text).map_err(|e| {
            let status = if e.is_coefficient_error() {
                WcdimStatus::CoefficientError
            } else {
                WcdimStatus::ParseError
            };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(WcdimScene {
            config,
            text: text.to_string(),
        }));
        Ok(())
    })
}

/// Releases a scene. Null is ignored.
///
/// # Safety
/// `scene` must come from [`wcdim_scene_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_free(scene: *mut WcdimScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_dimension(
    scene: *const WcdimScene,
    out: *mut usize,
) -> WcdimStatus {
    guard(|| {
        let s = scene_ref(scene)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = s.config.domain().dim();
        Ok(())
    })
}

/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_map_count(
    scene: *const WcdimScene,
    out: *mut usize,
) -> WcdimStatus {
    guard(|| {
        let s = scene_ref(scene)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = s.config.system.len();
        Ok(())
    })
}

/// Diameter bound `D` of the scene domain.
///
/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_diameter(
    scene: *const WcdimScene,
    out: *mut f64,
) -> WcdimStatus {
    guard(|| {
        let s = scene_ref(scene)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = s.config.domain().diameter_bound();
        Ok(())
    })
}

/// Upper bound `x0` on the Hausdorff dimension of the attractor.
///
/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_x0(scene: *const WcdimScene, out: *mut f64) -> WcdimStatus {
    guard(|| {
        let s = scene_ref(scene)?;
        let out = out.as_mut().ok_or_else(null)?;
        let infima = s
            .config
            .system
            .infima()
            .map_err(|e| (WcdimStatus::CoefficientError, e.to_string()))?;
        let x = MoranProblem::new(infima)
            .and_then(|p| p.with_tolerance(s.config.options.tolerance()))
            .map_err(|e| (WcdimStatus::ComputationError, e.to_string()))?
            .solve();
        *out = x;
        Ok(())
    })
}

/// Root of `sum_j c_j^x = 1` for `n >= 2` coefficients in `[0, 1)`.
/// `tolerance <= 0` selects the default.
///
/// # Safety
/// `coefficients` must point to `n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn wcdim_solve_moran(
    coefficients: *const f64,
    n: usize,
    tolerance: f64,
    out: *mut f64,
) -> WcdimStatus {
    guard(|| {
        if coefficients.is_null() {
            return Err(null());
        }
        let out = out.as_mut().ok_or_else(null)?;
        let c = std::slice::from_raw_parts(coefficients, n).to_vec();
        let mut p =
            MoranProblem::new(c).map_err(|e| (WcdimStatus::InvalidArgument, e.to_string()))?;
        if tolerance > 0.0 {
            p = p
                .with_tolerance(tolerance)
                .map_err(|e| (WcdimStatus::InvalidArgument, e.to_string()))?;
        }
        *out = p.solve();
        Ok(())
    })
}

/// Runs the verification pipeline and stores the JSON report in `*out`.
/// Release it with [`wcdim_string_free`].
///
/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_verify_json(
    scene: *const WcdimScene,
    out: *mut *mut c_char,
) -> WcdimStatus {
    guard(|| {
        let s = scene_ref(scene)?;
        if out.is_null() {
            return Err(null());
        }
        *out = ptr::null_mut();
        let r = report::verify(&s.config, &s.text)
            .map_err(|e| (WcdimStatus::ComputationError, e.to_string()))?;
        let json = CString::new(r.to_json_string())
            .map_err(|e| (WcdimStatus::ComputationError, e.to_string()))?;
        *out = json.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wcdim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Chaos-game sample of the attractor written row-major into `buffer`
/// (`n_points * dimension` doubles). `*written` receives the number of
/// doubles written. A burn-in of 100 steps is applied.
///
/// # Safety
/// `scene` and `written` must be valid, and `buffer` must hold `buffer_len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn wcdim_scene_chaos_game(
    scene: *const WcdimScene,
    n_points: usize,
    seed: u64,
    buffer: *mut f64,
    buffer_len: usize,
    written: *mut usize,
) -> WcdimStatus {
    guard(|| {
        let s = scene_ref(scene)?;
        if buffer.is_null() || written.is_null() {
            return Err(null());
        }
        *written = 0;
        let dim = s.config.domain().dim();
        let need = n_points.checked_mul(dim).ok_or((
            WcdimStatus::InvalidArgument,
            "n_points too large".to_string(),
        ))?;
        if buffer_len < need {
            return Err((
                WcdimStatus::BufferTooSmall,
                format!("buffer holds {buffer_len} doubles, {need} needed"),
            ));
        }
        let cloud = chaos_game(&s.config.system, &ChaosGameOptions::new(n_points, seed))
            .map_err(|e| (WcdimStatus::ComputationError, e.to_string()))?;
        let dst = std::slice::from_raw_parts_mut(buffer, need);
        for (chunk, p) in dst.chunks_exact_mut(dim).zip(&cloud.points) {
            chunk.copy_from_slice(p);
        }
        *written = need;
        Ok(())
    })
}
