//! Property tests over randomly generated rigs and points.

use nalgebra::{Vector2, Vector3};
use proptest::prelude::*;

use mvtri::bench::{dispersion, pairwise_disagreement};
use mvtri::calibration::{calibrate_dlt, CalibrationCorrespondence};
use mvtri::geometry::{fundamental_from_projections, CameraIntrinsics, CameraView};
use mvtri::scene::{NoiseModel, ObjectKind, ObjectModel, RigSpec, SceneFile, SyntheticScene};
use mvtri::triangulation::{
    hs_correct_pair, triangulate_linear, triangulate_nview_lm, triangulate_two_view_optimal,
};
use mvtri::{HomoPoint2, HomoPoint3, Observation, ProjectionMatrix, Track};

fn camera(azimuth: f64, elevation: f64, radius: f64, focal: f64) -> ProjectionMatrix {
    let k = CameraIntrinsics::from_focal_pixels(focal, 960.0, 540.0).unwrap();
    let center = Vector3::new(
        radius * azimuth.sin() * elevation.cos(),
        radius * elevation.sin(),
        radius * azimuth.cos() * elevation.cos(),
    );
    CameraView::look_at(k, center, Vector3::zeros(), Vector3::y(), 1920, 1080)
        .unwrap()
        .projection()
        .unwrap()
}

prop_compose! {
    fn rig()(
        az in prop::array::uniform3(-0.9f64..0.9),
        el in prop::array::uniform3(-0.3f64..0.3),
        radius in 15.0f64..30.0,
        focal in 800.0f64..3200.0,
    ) -> Vec<ProjectionMatrix> {
        (0..3).map(|i| camera(az[i], el[i], radius, focal)).collect()
    }
}

prop_compose! {
    fn point()(x in -3.0f64..3.0, y in -3.0f64..3.0, z in -3.0f64..3.0) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }
}

prop_compose! {
    fn noise()(n in prop::array::uniform6(-2.0f64..2.0)) -> [f64; 6] {
        n
    }
}

/// Track of `x` in every view with the given pixel offsets.
fn track(views: &[ProjectionMatrix], x: &Vector3<f64>, offsets: &[f64; 6]) -> Track {
    let obs = views
        .iter()
        .enumerate()
        .map(|(view, p)| Observation {
            view,
            pixel: p.project_pixel(&HomoPoint3::from_euclidean(x)).unwrap()
                + Vector2::new(offsets[2 * view], offsets[2 * view + 1]),
        })
        .collect();
    Track::new(0, obs).unwrap()
}

fn well_separated(views: &[ProjectionMatrix]) -> bool {
    let c: Vec<_> = views.iter().map(|p| p.center().unwrap().to_euclidean().unwrap()).collect();
    (0..3).all(|i| (i + 1..3).all(|j| (c[i] - c[j]).norm() > 2.0))
}

proptest! {
    #[test]
    fn projection_is_invariant_to_homogeneous_scale(
        views in rig(), x in point(), log_lambda in -6.0f64..6.0, negative in any::<bool>(),
    ) {
        let lambda = 10f64.powf(log_lambda) * if negative { -1.0 } else { 1.0 };
        let h = HomoPoint3::from_euclidean(&x);
        for p in &views {
            let a = p.project_pixel(&h).unwrap();
            let b = p.project_pixel(&h.scaled(lambda)).unwrap();
            prop_assert!((a - b).norm() < 1e-9 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn triangulation_ignores_projective_scale(
        views in rig(), x in point(), offsets in noise(), lambda in prop::array::uniform3(0.01f64..100.0),
    ) {
        prop_assume!(well_separated(&views));
        let t = track(&views, &x, &offsets);
        let scaled: Vec<_> = views.iter().zip(lambda).map(|(p, l)| p.scaled(-l)).collect();
        let a = triangulate_linear(&views, &t).unwrap().position();
        let b = triangulate_linear(&scaled, &t).unwrap().position();
        prop_assert!((a - b).norm() < 1e-9, "linear moved by {}", (a - b).norm());
        let a = triangulate_nview_lm(&views, &t).unwrap().position();
        let b = triangulate_nview_lm(&scaled, &t).unwrap().position();
        prop_assert!((a - b).norm() < 1e-9, "nview-lm moved by {}", (a - b).norm());
        let pair = |v: &[ProjectionMatrix]| {
            let o = t.observations();
            triangulate_two_view_optimal(&v[0], &v[1], &HomoPoint2::from_pixel(&o[0].pixel), &HomoPoint2::from_pixel(&o[1].pixel))
                .unwrap()
                .position()
        };
        prop_assert!((pair(&views) - pair(&scaled)).norm() < 1e-9);
    }

    #[test]
    fn optimal_pair_dominates_linear(views in rig(), x in point(), offsets in noise()) {
        prop_assume!(well_separated(&views));
        let t = track(&views, &x, &offsets).pair(0, 1);
        let o = t.observations();
        let opt = triangulate_two_view_optimal(
            &views[0], &views[1], &HomoPoint2::from_pixel(&o[0].pixel), &HomoPoint2::from_pixel(&o[1].pixel),
        ).unwrap();
        let lin = triangulate_linear(&views, &t).unwrap();
        prop_assert!(opt.geometric_error <= lin.geometric_error + 1e-9);
    }

    #[test]
    fn lm_dominates_its_initializer(views in rig(), x in point(), offsets in noise()) {
        prop_assume!(well_separated(&views));
        let t = track(&views, &x, &offsets);
        let lin = triangulate_linear(&views, &t).unwrap();
        let lm = triangulate_nview_lm(&views, &t).unwrap();
        prop_assert!(lm.geometric_error <= lin.geometric_error + 1e-12);
        let sum: f64 = lm.per_view_residual.iter().map(|r| r * r).sum();
        prop_assert!((sum - lm.geometric_error).abs() <= 1e-9 * (1.0 + sum));
    }

    #[test]
    fn corrected_pair_satisfies_epipolar_constraint(views in rig(), x in point(), offsets in noise()) {
        prop_assume!(well_separated(&views));
        let t = track(&views, &x, &offsets);
        let f = fundamental_from_projections(&views[0], &views[2]).unwrap();
        let f = f / f.norm();
        let o = t.observations();
        let c = hs_correct_pair(&f, &HomoPoint2::from_pixel(&o[0].pixel), &HomoPoint2::from_pixel(&o[2].pixel)).unwrap();
        let (a, b) = (c.x1.0 / c.x1.0.z, c.x2.0 / c.x2.0.z);
        prop_assert!(b.dot(&(f * a)).abs() < 1e-8);
        let moved = (a.xy() - o[0].pixel).norm_squared() + (b.xy() - o[2].pixel).norm_squared();
        prop_assert!((moved - c.cost).abs() <= 1e-6 * (1.0 + c.cost));
        let shifted = (o[0].pixel - Vector2::new(offsets[0], offsets[1]), o[2].pixel - Vector2::new(offsets[4], offsets[5]));
        let truth = (shifted.0 - o[0].pixel).norm_squared() + (shifted.1 - o[2].pixel).norm_squared();
        prop_assert!(c.cost <= truth + 1e-9);
    }

    #[test]
    fn dlt_ignores_correspondence_order(
        views in rig(), pts in prop::collection::vec(point(), 8..20), seed in any::<u64>(),
    ) {
        let corrs: Vec<_> = pts
            .iter()
            .map(|x| CalibrationCorrespondence::new(*x, views[0].project_pixel(&HomoPoint3::from_euclidean(x)).unwrap()))
            .collect();
        let mut shuffled = corrs.clone();
        let n = shuffled.len();
        for i in 0..n {
            shuffled.swap(i, (seed.rotate_left(i as u32) as usize) % n);
        }
        let a = calibrate_dlt(&corrs).unwrap().projection.0;
        let b = calibrate_dlt(&shuffled).unwrap().projection.0;
        prop_assert!((a - b).norm().min((a + b).norm()) < 1e-9);
    }

    #[test]
    fn dlt_is_scale_equivariant(
        views in rig(), pts in prop::collection::vec(point(), 8..20), s in 0.1f64..10.0, w in 0.1f64..10.0,
    ) {
        let corrs: Vec<_> = pts
            .iter()
            .map(|x| {
                let u = views[1].project_pixel(&HomoPoint3::from_euclidean(x)).unwrap();
                CalibrationCorrespondence::new(x * w, u * s)
            })
            .collect();
        prop_assert!(calibrate_dlt(&corrs).unwrap().rms_reprojection < 1e-8 * s.max(1.0));
    }

    #[test]
    fn dispersion_is_zero_only_at_ground_truth(
        pts in prop::collection::vec(point(), 1..20), shift in point(),
    ) {
        prop_assert_eq!(dispersion(&pts, &pts).unwrap(), 0.0);
        let moved: Vec<_> = pts.iter().map(|p| p + shift).collect();
        let d = dispersion(&moved, &pts).unwrap();
        prop_assert!((d - shift.norm()).abs() < 1e-12);
        let per_track: Vec<_> = pts.iter().map(|p| vec![*p, *p + shift]).collect();
        prop_assert!((pairwise_disagreement(&per_track).unwrap() - shift.norm()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scenes_are_deterministic_and_visible(
        seed in any::<u64>(), sigma in 0.0f64..3.0, quantize in any::<bool>(), detect in 0.3f64..1.0, random in any::<bool>(),
    ) {
        let object = ObjectModel {
            kind: if random { ObjectKind::RandomBox } else { ObjectKind::PlanarGrid },
            seed,
            ..ObjectModel::default()
        };
        let noise = NoiseModel { sigma_px: sigma, quantize, detect_prob: detect, seed };
        let rig = RigSpec::default();
        let a = SyntheticScene::generate(&object, &rig, &noise).unwrap();
        let b = SyntheticScene::generate(&object, &rig, &noise).unwrap();
        let ja = SceneFile::from_scene(&a).unwrap().to_json();
        let jb = SceneFile::from_scene(&b).unwrap().to_json();
        prop_assert_eq!(ja, jb);
        for t in &a.tracks {
            prop_assert!(t.len() >= 2);
            for o in t.observations() {
                let v = &a.views[o.view];
                prop_assert!(o.pixel.x >= 0.0 && o.pixel.x < v.image_width as f64);
                prop_assert!(o.pixel.y >= 0.0 && o.pixel.y < v.image_height as f64);
            }
        }
    }
}
