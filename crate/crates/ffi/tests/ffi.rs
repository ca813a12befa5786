use std::ffi::{CStr, CString};
use std::ptr;

use mvtri::geometry::{CameraIntrinsics, CameraView, HomoPoint3};
use mvtri_ffi::*;
use nalgebra::Vector3;

fn rig() -> Vec<[f64; 12]> {
    let k = CameraIntrinsics::from_focal_pixels(1800.0, 960.0, 540.0).unwrap();
    [-4.0, 0.0, 5.0]
        .iter()
        .map(|&x| {
            CameraView::look_at(k, Vector3::new(x, 0.3, 20.0), Vector3::zeros(), Vector3::y(), 1920, 1080)
                .unwrap()
                .projection()
                .unwrap()
                .to_row_major()
        })
        .collect()
}

fn pixels(views: &[[f64; 12]], x: &Vector3<f64>) -> Vec<f64> {
    views
        .iter()
        .flat_map(|p| {
            let px = mvtri::ProjectionMatrix::from_row_major(p)
                .project_pixel(&HomoPoint3::from_euclidean(x))
                .unwrap();
            [px.x, px.y]
        })
        .collect()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mvtri_last_error_message()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn version_and_conjecture() {
    let v = unsafe { CStr::from_ptr(mvtri_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    let mut d = 0u64;
    assert_eq!(unsafe { mvtri_degree_conjecture(3, &mut d) }, MvtriStatus::Ok);
    assert_eq!(d, 47);
    assert_eq!(unsafe { mvtri_degree_conjecture(1, &mut d) }, MvtriStatus::NumericalFailure);
    assert!(last_error().contains("n >= 2"));
    assert_eq!(unsafe { mvtri_degree_conjecture(2, ptr::null_mut()) }, MvtriStatus::InvalidArgument);
}

#[test]
fn two_view_and_nview() {
    let views = rig();
    let x = Vector3::new(0.4, -1.2, 0.9);
    let px = pixels(&views, &x);
    let mut out = MvtriPoint::default();
    let s = unsafe {
        mvtri_triangulate_two_view(views[0].as_ptr(), views[2].as_ptr(), px[0..].as_ptr(), px[4..].as_ptr(), &mut out)
    };
    assert_eq!(s, MvtriStatus::Ok);
    assert!((Vector3::new(out.x, out.y, out.z) - x).norm() < 1e-9);

    let flat: Vec<f64> = views.iter().flatten().copied().collect();
    for method in [MvtriMethod::Linear, MvtriMethod::NviewLm] {
        let mut out = MvtriPoint::default();
        let s = unsafe { mvtri_triangulate_nview(flat.as_ptr(), px.as_ptr(), 3, method, &mut out) };
        assert_eq!(s, MvtriStatus::Ok, "{}", last_error());
        assert!((Vector3::new(out.x, out.y, out.z) - x).norm() < 1e-9);
        assert!(out.converged);
    }
    let s = unsafe { mvtri_triangulate_nview(flat.as_ptr(), px.as_ptr(), 3, MvtriMethod::TwoViewOptimal, &mut out) };
    assert_eq!(s, MvtriStatus::InvalidArgument);
    let s = unsafe { mvtri_triangulate_nview(flat.as_ptr(), px.as_ptr(), 1, MvtriMethod::Linear, &mut out) };
    assert_eq!(s, MvtriStatus::InvalidArgument);
    let s = unsafe { mvtri_triangulate_nview(ptr::null(), px.as_ptr(), 3, MvtriMethod::Linear, &mut out) };
    assert_eq!(s, MvtriStatus::InvalidArgument);
    assert!(last_error().contains("projections"));
}

#[test]
fn calibration() {
    let p = rig()[1];
    let world: Vec<f64> = (0..20)
        .flat_map(|i| {
            let t = i as f64;
            [(t * 0.7).sin() * 3.0, (t * 1.3).cos() * 2.0, (t * 0.37).sin() * 2.5]
        })
        .collect();
    let px: Vec<f64> = world
        .chunks(3)
        .flat_map(|w| pixels(&[p], &Vector3::new(w[0], w[1], w[2])))
        .collect();
    let mut est = [0.0; 12];
    let mut rms = -1.0;
    let s = unsafe { mvtri_calibrate_dlt(world.as_ptr(), px.as_ptr(), 20, est.as_mut_ptr(), &mut rms) };
    assert_eq!(s, MvtriStatus::Ok, "{}", last_error());
    assert!(rms < 1e-6);
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sign = if p[0] * est[0] < 0.0 { -1.0 } else { 1.0 };
    for (a, b) in p.iter().zip(est) {
        assert!((a / norm - sign * b).abs() < 1e-8);
    }
    let s = unsafe { mvtri_calibrate_dlt(world.as_ptr(), px.as_ptr(), 5, est.as_mut_ptr(), &mut rms) };
    assert_eq!(s, MvtriStatus::NumericalFailure);
    assert!(last_error().contains("at least 6"));
}

#[test]
fn simulated_scene_handle() {
    let config = CString::new(r#"{"experiments": [{"id": "a", "noise": {"sigma_px": 0}}]}"#).unwrap();
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { mvtri_scene_simulate(config.as_ptr(), 0, &mut scene) }, MvtriStatus::Ok);
    assert!(!scene.is_null());
    let (mut views, mut tracks) = (0usize, 0usize);
    unsafe {
        assert_eq!(mvtri_scene_view_count(scene, &mut views), MvtriStatus::Ok);
        assert_eq!(mvtri_scene_track_count(scene, &mut tracks), MvtriStatus::Ok);
    }
    assert_eq!((views, tracks), (3, 100));
    for i in 0..tracks {
        let mut id = 0u64;
        let mut gt = [0.0; 3];
        unsafe {
            assert_eq!(mvtri_scene_track_point_id(scene, i, &mut id), MvtriStatus::Ok);
            assert_eq!(mvtri_scene_ground_truth(scene, id, gt.as_mut_ptr()), MvtriStatus::Ok);
        }
        for method in [MvtriMethod::Linear, MvtriMethod::TwoViewOptimal, MvtriMethod::NviewLm] {
            let mut out = MvtriPoint::default();
            assert_eq!(unsafe { mvtri_scene_triangulate(scene, i, method, &mut out) }, MvtriStatus::Ok);
            assert!((Vector3::new(out.x, out.y, out.z) - Vector3::from(gt)).norm() < 1e-8);
        }
    }
    let mut out = MvtriPoint::default();
    assert_eq!(
        unsafe { mvtri_scene_triangulate(scene, tracks, MvtriMethod::Linear, &mut out) },
        MvtriStatus::InvalidArgument
    );
    unsafe { mvtri_scene_free(scene) };
    unsafe { mvtri_scene_free(ptr::null_mut()) };
}

#[test]
fn scene_parse_errors() {
    let mut scene = ptr::null_mut();
    let bad = CString::new(r#"{"views": []"#).unwrap();
    assert_eq!(unsafe { mvtri_scene_from_json(bad.as_ptr(), &mut scene) }, MvtriStatus::ConfigError);
    assert!(scene.is_null());
    assert!(last_error().contains("parse error"));
    let config = CString::new(r#"{"experiments": [{"id": "a", "trials": 0}]}"#).unwrap();
    assert_eq!(unsafe { mvtri_scene_simulate(config.as_ptr(), 0, &mut scene) }, MvtriStatus::ConfigError);
    assert_eq!(unsafe { mvtri_scene_from_json(ptr::null(), &mut scene) }, MvtriStatus::InvalidArgument);
}

#[test]
fn scene_from_json() {
    let text = CString::new(
        r#"{"views": [
            {"P": [1,0,0,0, 0,1,0,0, 0,0,1,0], "width": 10, "height": 10},
            {"P": [1,0,0,-1, 0,1,0,0, 0,0,1,0], "width": 10, "height": 10}],
          "tracks": [{"point_id": 0, "observations": [[0, 0.1, 0.2], [1, -0.1, 0.2]]}]}"#,
    )
    .unwrap();
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { mvtri_scene_from_json(text.as_ptr(), &mut scene) }, MvtriStatus::Ok);
    let mut out = MvtriPoint::default();
    assert_eq!(unsafe { mvtri_scene_triangulate(scene, 0, MvtriMethod::Linear, &mut out) }, MvtriStatus::Ok);
    assert!((out.x - 0.5).abs() < 1e-12 && (out.y - 1.0).abs() < 1e-12 && (out.z - 5.0).abs() < 1e-12);
    let mut gt = [0.0; 3];
    assert_eq!(
        unsafe { mvtri_scene_ground_truth(scene, 0, gt.as_mut_ptr()) },
        MvtriStatus::InvalidArgument
    );
    unsafe { mvtri_scene_free(scene) };
}
