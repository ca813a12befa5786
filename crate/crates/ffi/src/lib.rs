//! C ABI for the mvtri triangulation toolkit.
//!
//! Every fallible function returns an [`MvtriStatus`]; on failure a
//! description is available from [`mvtri_last_error_message`] on the same
//! thread. Scenes are opaque handles created by [`mvtri_scene_from_json`]
//! or [`mvtri_scene_simulate`] and released with [`mvtri_scene_free`].
//! Projection matrices are passed as 12 doubles in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use nalgebra::{Vector2, Vector3};

use mvtri::bench::{parse_config_str, trial_scene};
use mvtri::calibration::{calibrate_dlt, CalibrationCorrespondence};
use mvtri::scene::SceneFile;
use mvtri::triangulation::{
    degree_conjecture, triangulate_linear, triangulate_nview_lm, triangulate_two_view_optimal,
};
use mvtri::{Error, HomoPoint2, Method, Observation, ProjectionMatrix, Track, TriangulationResult};

/// Result of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvtriStatus {
    Ok = 0,
    /// A null pointer, bad length or out-of-range index was passed.
    InvalidArgument = 1,
    /// Malformed or invalid configuration or scene document.
    ConfigError = 2,
    /// The computation failed (degenerate geometry, point at infinity, ...).
    NumericalFailure = 3,
    IoError = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MvtriMethod {
    Linear = 0,
    TwoViewOptimal = 1,
    NviewLm = 2,
}

impl From<MvtriMethod> for Method {
    fn from(m: MvtriMethod) -> Self {
        match m {
            MvtriMethod::Linear => Method::Linear,
            MvtriMethod::TwoViewOptimal => Method::TwoViewOptimal,
            MvtriMethod::NviewLm => Method::NViewLm,
        }
    }
}

/// A triangulated scene point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MvtriPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Sum of squared pixel residuals against the input observations.
    pub geometric_error: f64,
    pub converged: bool,
}

impl From<&TriangulationResult> for MvtriPoint {
    fn from(r: &TriangulationResult) -> Self {
        let p = r.position();
        MvtriPoint {
            x: p.x,
            y: p.y,
            z: p.z,
            geometric_error: r.geometric_error,
            converged: r.converged,
        }
    }
}

/// Opaque scene handle.
pub struct MvtriScene {
    file: SceneFile,
    views: Vec<ProjectionMatrix>,
    tracks: Vec<Track>,
}

impl MvtriScene {
    fn new(file: SceneFile) -> Result<Self, Error> {
        let views = file.projections();
        let tracks = file.tracks()?;
        Ok(MvtriScene { file, views, tracks })
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Argument(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn arg(msg: &str) -> Failure {
    Failure::Argument(msg.to_string())
}

fn status_of(e: &Error) -> MvtriStatus {
    match e {
        Error::InvalidViewIndex { .. } | Error::LengthMismatch { .. } | Error::EmptyInput => {
            MvtriStatus::InvalidArgument
        }
        _ => match e.exit_code() {
            2 => MvtriStatus::ConfigError,
            4 => MvtriStatus::IoError,
            _ => MvtriStatus::NumericalFailure,
        },
    }
}

/// Runs `f`, converting errors and panics into a status and the thread's
/// last error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MvtriStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            MvtriStatus::Ok
        }
        Ok(Err(Failure::Argument(msg))) => {
            set_last_error(&msg);
            MvtriStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MvtriStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(arg(&format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| arg(&format!("{name} is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(arg(&format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| arg(&format!("{name} is null")))
}

fn projection(entries: &[f64]) -> ProjectionMatrix {
    let mut a = [0.0; 12];
    a.copy_from_slice(&entries[..12]);
    ProjectionMatrix::from_row_major(&a)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mvtri_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next mvtri call on the same thread.
#[no_mangle]
pub extern "C" fn mvtri_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Conjectured degree of the optimal n-view triangulation polynomial.
///
/// # Safety
/// `out` must be a valid pointer to a `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn mvtri_degree_conjecture(n: u32, out: *mut u64) -> MvtriStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = degree_conjecture(n)?;
        Ok(())
    })
}

/// Optimal two-view triangulation of pixel `x1` in `p1` and `x2` in `p2`.
///
/// # Safety
/// `p1` and `p2` point to 12 doubles, `x1` and `x2` to 2 doubles, `out` to
/// an `MvtriPoint`.
#[no_mangle]
pub unsafe extern "C" fn mvtri_triangulate_two_view(
    p1: *const f64,
    p2: *const f64,
    x1: *const f64,
    x2: *const f64,
    out: *mut MvtriPoint,
) -> MvtriStatus {
    guard(|| {
        let p1 = projection(slice_arg(p1, 12, "p1")?);
        let p2 = projection(slice_arg(p2, 12, "p2")?);
        let x1 = slice_arg(x1, 2, "x1")?;
        let x2 = slice_arg(x2, 2, "x2")?;
        let out = out_arg(out, "out")?;
        let r = triangulate_two_view_optimal(
            &p1,
            &p2,
            &HomoPoint2::pixel(x1[0], x1[1]),
            &HomoPoint2::pixel(x2[0], x2[1]),
        )?;
        *out = MvtriPoint::from(&r);
        Ok(())
    })
}

/// Triangulates one point seen in `n` views: `projections` holds `n`
/// row-major 3x4 matrices and `pixels` the `n` observations `(u, v)`.
/// `method` selects linear, or Levenberg–Marquardt refinement of the
/// reprojection error; the two-view optimal method needs `n == 2`.
///
/// # Safety
/// `projections` points to `12 n` doubles, `pixels` to `2 n` doubles and
/// `out` to an `MvtriPoint`.
#[no_mangle]
pub unsafe extern "C" fn mvtri_triangulate_nview(
    projections: *const f64,
    pixels: *const f64,
    n: usize,
    method: MvtriMethod,
    out: *mut MvtriPoint,
) -> MvtriStatus {
    guard(|| {
        if n < 2 {
            return Err(arg("at least 2 views are required"));
        }
        let entries = slice_arg(projections, 12 * n, "projections")?;
        let pixels = slice_arg(pixels, 2 * n, "pixels")?;
        let out = out_arg(out, "out")?;
        let views: Vec<_> = entries.chunks_exact(12).map(projection).collect();
        let obs = pixels
            .chunks_exact(2)
            .enumerate()
            .map(|(view, p)| Observation {
                view,
                pixel: Vector2::new(p[0], p[1]),
            })
            .collect();
        let track = Track::new(0, obs)?;
        *out = MvtriPoint::from(&triangulate(method.into(), &views, &track)?);
        Ok(())
    })
}

fn triangulate(method: Method, views: &[ProjectionMatrix], track: &Track) -> Result<TriangulationResult, Failure> {
    Ok(match method {
        Method::Linear => triangulate_linear(views, track)?,
        Method::NViewLm => triangulate_nview_lm(views, track)?,
        Method::TwoViewOptimal => {
            if track.len() != 2 {
                return Err(arg("the two-view optimal method needs exactly 2 observations"));
            }
            let (a, b) = (track.observations()[0], track.observations()[1]);
            let view = |v: usize| {
                views.get(v).ok_or(Error::InvalidViewIndex {
                    index: v,
                    count: views.len(),
                })
            };
            triangulate_two_view_optimal(
                view(a.view)?,
                view(b.view)?,
                &HomoPoint2::from_pixel(&a.pixel),
                &HomoPoint2::from_pixel(&b.pixel),
            )?
        }
    })
}

/// DLT calibration from `n >= 6` correspondences: `world` holds `n` points
/// `(X, Y, Z)` and `pixels` the `n` observations `(u, v)`. Writes the
/// row-major `P` (unit Frobenius norm) and the RMS reprojection error.
///
/// # Safety
/// `world` points to `3 n` doubles, `pixels` to `2 n`, `p_out` to 12 and
/// `rms_out` to one double.
#[no_mangle]
pub unsafe extern "C" fn mvtri_calibrate_dlt(
    world: *const f64,
    pixels: *const f64,
    n: usize,
    p_out: *mut f64,
    rms_out: *mut f64,
) -> MvtriStatus {
    guard(|| {
        let world = slice_arg(world, 3 * n, "world")?;
        let pixels = slice_arg(pixels, 2 * n, "pixels")?;
        if p_out.is_null() {
            return Err(arg("p_out is null"));
        }
        let rms_out = out_arg(rms_out, "rms_out")?;
        let corrs: Vec<_> = world
            .chunks_exact(3)
            .zip(pixels.chunks_exact(2))
            .map(|(w, p)| CalibrationCorrespondence::new(Vector3::new(w[0], w[1], w[2]), Vector2::new(p[0], p[1])))
            .collect();
        let result = calibrate_dlt(&corrs)?;
        slice::from_raw_parts_mut(p_out, 12).copy_from_slice(&result.projection.to_row_major());
        *rms_out = result.rms_reprojection;
        Ok(())
    })
}

/// Parses a scene document (see the README for the schema).
///
/// # Safety
/// `json` is a NUL-terminated UTF-8 string and `out` a valid pointer. On
/// success `*out` owns a scene to be released with `mvtri_scene_free`.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_from_json(json: *const c_char, out: *mut *mut MvtriScene) -> MvtriStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let scene = MvtriScene::new(SceneFile::parse(text)?)?;
        *out = Box::into_raw(Box::new(scene));
        Ok(())
    })
}

/// Simulates trial `trial` of the first experiment in an experiment config
/// document.
///
/// # Safety
/// As for `mvtri_scene_from_json`.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_simulate(
    config_json: *const c_char,
    trial: u32,
    out: *mut *mut MvtriScene,
) -> MvtriStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let configs = parse_config_str(text)?;
        let config = configs
            .first()
            .ok_or_else(|| Error::Config("config lists no experiments".into()))?;
        let scene = trial_scene(config, trial)?;
        let handle = MvtriScene::new(SceneFile::from_scene(&scene)?)?;
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Releases a scene. Null is ignored.
///
/// # Safety
/// `scene` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_free(scene: *mut MvtriScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_view_count(scene: *const MvtriScene, out: *mut usize) -> MvtriStatus {
    guard(|| {
        let scene = scene.as_ref().ok_or_else(|| arg("scene is null"))?;
        *out_arg(out, "out")? = scene.views.len();
        Ok(())
    })
}

/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_track_count(scene: *const MvtriScene, out: *mut usize) -> MvtriStatus {
    guard(|| {
        let scene = scene.as_ref().ok_or_else(|| arg("scene is null"))?;
        *out_arg(out, "out")? = scene.tracks.len();
        Ok(())
    })
}

/// Point id of track `index`, which indexes the scene's ground truth for
/// simulated scenes.
///
/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_track_point_id(
    scene: *const MvtriScene,
    index: usize,
    out: *mut u64,
) -> MvtriStatus {
    guard(|| {
        let scene = scene.as_ref().ok_or_else(|| arg("scene is null"))?;
        let track = scene.tracks.get(index).ok_or_else(|| arg("track index out of range"))?;
        *out_arg(out, "out")? = track.point_id;
        Ok(())
    })
}

/// Ground-truth position of `point_id`; fails when the scene has none.
///
/// # Safety
/// `scene` must be valid and `xyz` point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_ground_truth(
    scene: *const MvtriScene,
    point_id: u64,
    xyz: *mut f64,
) -> MvtriStatus {
    guard(|| {
        let scene = scene.as_ref().ok_or_else(|| arg("scene is null"))?;
        if xyz.is_null() {
            return Err(arg("xyz is null"));
        }
        let p = scene
            .file
            .ground_truth_of(point_id)
            .ok_or_else(|| arg("no ground truth for this point"))?;
        slice::from_raw_parts_mut(xyz, 3).copy_from_slice(p.as_slice());
        Ok(())
    })
}

/// Triangulates track `index` of a scene. The two-view optimal method uses
/// the track's first two observations.
///
/// # Safety
/// `scene` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mvtri_scene_triangulate(
    scene: *const MvtriScene,
    index: usize,
    method: MvtriMethod,
    out: *mut MvtriPoint,
) -> MvtriStatus {
    guard(|| {
        let scene = scene.as_ref().ok_or_else(|| arg("scene is null"))?;
        let out = out_arg(out, "out")?;
        let track = scene.tracks.get(index).ok_or_else(|| arg("track index out of range"))?;
        let method = Method::from(method);
        let track = if method == Method::TwoViewOptimal && track.len() > 2 {
            track.pair(0, 1)
        } else {
            track.clone()
        };
        *out = MvtriPoint::from(&triangulate(method, &scene.views, &track)?);
        Ok(())
    })
}
