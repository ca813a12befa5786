//! Synthetic multi-view scenes: a parametric object, a three-camera rig and
//! an observation model with Gaussian noise, pixel quantization and random
//! detection dropout.
//!
//! All lengths are centimetres. The object sits at the world origin with its
//! plane on `z = 0`; cameras look at it from `z > 0` with `+y` up.

mod io;

pub use io::{read_scene, write_scene, SceneFile, TrackRecord, ViewRecord};

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, CameraView, HomoPoint3};
use crate::triangulation::{Observation, Track};

/// Minimum number of object points.
pub const MIN_OBJECT_POINTS: usize = 8;
/// Camera stations of the distance study, measured from the left-most one.
pub const DISTANCE_STATIONS_CM: [f64; 7] = [0.0, 1.73, 3.46, 5.33, 7.2, 9.16, 10.93];
/// Width of the `native` preset; focal lengths of other presets scale from it.
pub const NATIVE_WIDTH: u32 = 4032;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    PlanarGrid,
    RandomBox,
}

/// Parametric stand-in for the photographed object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectModel {
    pub kind: ObjectKind,
    /// Full side lengths along x, y, z.
    pub extents: [f64; 3],
    /// `(rows, cols)` of a planar grid.
    pub grid_counts: [u32; 2],
    /// Number of points in a random box.
    pub point_count: usize,
    pub seed: u64,
}

impl Default for ObjectModel {
    fn default() -> Self {
        ObjectModel {
            kind: ObjectKind::PlanarGrid,
            extents: [10.0, 10.0, 0.0],
            grid_counts: [10, 10],
            point_count: 100,
            seed: 0,
        }
    }
}

impl ObjectModel {
    pub fn validate(&self) -> Result<()> {
        if !self.extents.iter().all(|e| e.is_finite() && *e >= 0.0) {
            return Err(Error::InvalidSpec("object extents must be finite and >= 0".into()));
        }
        let count = match self.kind {
            ObjectKind::PlanarGrid => self.grid_counts[0] as usize * self.grid_counts[1] as usize,
            ObjectKind::RandomBox => self.point_count,
        };
        if count < MIN_OBJECT_POINTS {
            return Err(Error::InvalidSpec(format!(
                "object needs at least {MIN_OBJECT_POINTS} points, got {count}"
            )));
        }
        Ok(())
    }
}

/// Object points: a centered grid on `z = 0` or uniform samples in a
/// centered box.
pub fn make_object(model: &ObjectModel) -> Result<Vec<HomoPoint3>> {
    model.validate()?;
    let [ex, ey, ez] = model.extents;
    let points = match model.kind {
        ObjectKind::PlanarGrid => {
            let [rows, cols] = model.grid_counts;
            let coord = |i: u32, n: u32, extent: f64| {
                if n == 1 {
                    0.0
                } else {
                    -extent / 2.0 + extent * i as f64 / (n - 1) as f64
                }
            };
            (0..rows)
                .flat_map(|r| {
                    (0..cols).map(move |c| {
                        HomoPoint3::new(coord(c, cols, ex), -coord(r, rows, ey), 0.0, 1.0)
                    })
                })
                .collect()
        }
        ObjectKind::RandomBox => {
            let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
            let mut uniform = |e: f64| rng.random::<f64>() * e - e / 2.0;
            (0..model.point_count)
                .map(|_| {
                    let (x, y, z) = (uniform(ex), uniform(ey), uniform(ez));
                    HomoPoint3::new(x, y, z, 1.0)
                })
                .collect()
        }
    };
    Ok(points)
}

/// Image size, optionally one of the named presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ResolutionRepr", into = "ResolutionRepr")]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

impl Resolution {
    pub const LOW: Resolution = Resolution { width: 480, height: 320 };
    pub const FULLHD: Resolution = Resolution { width: 1920, height: 1080 };
    pub const ULTRAHD: Resolution = Resolution { width: 3840, height: 2160 };
    pub const NATIVE: Resolution = Resolution { width: NATIVE_WIDTH, height: 3024 };

    /// The ladder from lowest to highest.
    pub const PRESETS: [(&'static str, Resolution); 4] = [
        ("low", Resolution::LOW),
        ("fullhd", Resolution::FULLHD),
        ("ultrahd", Resolution::ULTRAHD),
        ("native", Resolution::NATIVE),
    ];

    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidSpec(format!("resolution must be positive, got {width}x{height}")));
        }
        Ok(Resolution { width, height })
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, r)| *r)
            .ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "unknown resolution preset `{name}` (expected low, fullhd, ultrahd or native)"
                ))
            })
    }

    pub fn preset_name(&self) -> Option<&'static str> {
        Self::PRESETS.iter().find(|(_, r)| r == self).map(|(n, _)| *n)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ResolutionRepr {
    Preset(String),
    Size([u32; 2]),
}

impl TryFrom<ResolutionRepr> for Resolution {
    type Error = Error;

    fn try_from(r: ResolutionRepr) -> Result<Self> {
        match r {
            ResolutionRepr::Preset(name) => Resolution::preset(&name),
            ResolutionRepr::Size([w, h]) => Resolution::new(w, h),
        }
    }
}

impl From<Resolution> for ResolutionRepr {
    fn from(r: Resolution) -> Self {
        match r.preset_name() {
            Some(name) => ResolutionRepr::Preset(name.into()),
            None => ResolutionRepr::Size([r.width, r.height]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RigKind {
    Angle,
    Distance,
    Custom,
}

/// A camera of a custom rig, aimed at `target` with `+y` up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomCamera {
    pub center: [f64; 3],
    #[serde(default)]
    pub target: [f64; 3],
}

/// Camera placement and intrinsics of a three-camera rig.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigSpec {
    pub kind: RigKind,
    /// Radius of the circle the angle-study cameras sit on.
    pub middle_distance_cm: f64,
    pub left_angle_deg: f64,
    pub right_angle_deg: f64,
    /// Three stations along the baseline, measured from the left-most one.
    pub camera_offsets_cm: [f64; 3],
    /// Distance from the object plane to the baseline.
    pub standoff_cm: f64,
    /// Station that lies on the perpendicular bisector of the object.
    pub bisector_offset_cm: f64,
    pub resolution: Resolution,
    /// Focal length in pixels; derived from `native_focal_pixels` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focal_pixels: Option<f64>,
    /// Focal length in pixels at the native width.
    pub native_focal_pixels: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cameras: Vec<CustomCamera>,
}

impl Default for RigSpec {
    fn default() -> Self {
        RigSpec {
            kind: RigKind::Angle,
            middle_distance_cm: 21.0,
            left_angle_deg: 5.33,
            right_angle_deg: 16.79,
            camera_offsets_cm: [1.73, 5.33, 7.2],
            standoff_cm: 21.0,
            bisector_offset_cm: 5.33,
            resolution: Resolution::ULTRAHD,
            focal_pixels: None,
            native_focal_pixels: 3200.0,
            cameras: Vec::new(),
        }
    }
}

impl RigSpec {
    /// Focal length in pixels for the configured resolution. Without an
    /// explicit value the native focal length is scaled by width, keeping
    /// the field of view fixed across resolutions.
    pub fn effective_focal_pixels(&self) -> f64 {
        self.focal_pixels
            .unwrap_or(self.native_focal_pixels * self.resolution.width as f64 / NATIVE_WIDTH as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.effective_focal_pixels()) {
            return Err(Error::InvalidSpec("focal_pixels must be > 0".into()));
        }
        if self.resolution.width == 0 || self.resolution.height == 0 {
            return Err(Error::InvalidSpec("resolution must be positive".into()));
        }
        match self.kind {
            RigKind::Angle => {
                if !positive(self.middle_distance_cm) {
                    return Err(Error::InvalidSpec("middle_distance_cm must be > 0".into()));
                }
                for (name, a) in [("left_angle_deg", self.left_angle_deg), ("right_angle_deg", self.right_angle_deg)] {
                    if !(a > 0.0 && a < 90.0) {
                        return Err(Error::InvalidSpec(format!("{name} must lie in (0, 90), got {a}")));
                    }
                }
            }
            RigKind::Distance => {
                if !positive(self.standoff_cm) {
                    return Err(Error::InvalidSpec("standoff_cm must be > 0".into()));
                }
                let o = self.camera_offsets_cm;
                if !o.iter().all(|x| x.is_finite()) || !(o[0] < o[1] && o[1] < o[2]) {
                    return Err(Error::InvalidSpec(format!(
                        "camera_offsets_cm must be strictly increasing, got {o:?}"
                    )));
                }
                if !self.bisector_offset_cm.is_finite() {
                    return Err(Error::InvalidSpec("bisector_offset_cm must be finite".into()));
                }
            }
            RigKind::Custom => {
                if self.cameras.len() < 2 {
                    return Err(Error::InvalidSpec("a custom rig needs at least 2 cameras".into()));
                }
            }
        }
        Ok(())
    }

    fn intrinsics(&self) -> Result<CameraIntrinsics> {
        let r = self.resolution;
        CameraIntrinsics::from_focal_pixels(
            self.effective_focal_pixels(),
            r.width as f64 / 2.0,
            r.height as f64 / 2.0,
        )
    }

    fn aimed(&self, center: Vector3<f64>, target: Vector3<f64>) -> Result<CameraView> {
        CameraView::look_at(
            self.intrinsics()?,
            center,
            target,
            Vector3::y(),
            self.resolution.width,
            self.resolution.height,
        )
        .map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

/// Cameras on the circle of radius `middle_distance_cm` in the `y = 0`
/// plane, ordered left, middle, right at azimuths `-left`, `0`, `+right`,
/// all looking at the origin.
pub fn make_angle_rig(spec: &RigSpec) -> Result<Vec<CameraView>> {
    if spec.kind != RigKind::Angle {
        return Err(Error::InvalidSpec("make_angle_rig needs an angle rig".into()));
    }
    spec.validate()?;
    let r = spec.middle_distance_cm;
    [-spec.left_angle_deg, 0.0, spec.right_angle_deg]
        .iter()
        .map(|deg| {
            let t = deg.to_radians();
            spec.aimed(Vector3::new(r * t.sin(), 0.0, r * t.cos()), Vector3::zeros())
        })
        .collect()
}

/// Cameras on the line `z = standoff_cm`, `y = 0`, at the configured
/// stations, aimed at the object centroid. The bisector station sits at
/// `x = 0`; smaller offsets lie to the left.
pub fn make_distance_rig(spec: &RigSpec) -> Result<Vec<CameraView>> {
    if spec.kind != RigKind::Distance {
        return Err(Error::InvalidSpec("make_distance_rig needs a distance rig".into()));
    }
    spec.validate()?;
    spec.camera_offsets_cm
        .iter()
        .map(|o| {
            spec.aimed(
                Vector3::new(o - spec.bisector_offset_cm, 0.0, spec.standoff_cm),
                Vector3::zeros(),
            )
        })
        .collect()
}

/// Builds the cameras of any rig kind.
pub fn make_rig(spec: &RigSpec) -> Result<Vec<CameraView>> {
    match spec.kind {
        RigKind::Angle => make_angle_rig(spec),
        RigKind::Distance => make_distance_rig(spec),
        RigKind::Custom => {
            spec.validate()?;
            spec.cameras
                .iter()
                .map(|c| spec.aimed(Vector3::from(c.center), Vector3::from(c.target)))
                .collect()
        }
    }
}

/// Observation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Standard deviation of isotropic Gaussian pixel noise.
    pub sigma_px: f64,
    /// Snap noisy observations to pixel centers.
    pub quantize: bool,
    /// Probability that an in-view observation is detected.
    pub detect_prob: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            sigma_px: 0.5,
            quantize: false,
            detect_prob: 1.0,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_px.is_finite() && self.sigma_px >= 0.0) {
            return Err(Error::Validation(format!("sigma_px must be >= 0, got {}", self.sigma_px)));
        }
        if !(0.0..=1.0).contains(&self.detect_prob) {
            return Err(Error::Validation(format!(
                "detect_prob must lie in [0, 1], got {}",
                self.detect_prob
            )));
        }
        Ok(())
    }
}

/// Center of the pixel containing `u`.
fn quantize(u: f64) -> f64 {
    u.floor() + 0.5
}

/// Simulated observations of `points` in `views`.
///
/// Every (point, view) pair consumes the same random draws whether or not
/// the observation survives, so scenes that differ only in `sigma_px` or
/// `detect_prob` share their noise directions and dropout pattern.
pub fn render_tracks(views: &[CameraView], points: &[HomoPoint3], noise: &NoiseModel) -> Result<Vec<Track>> {
    noise.validate()?;
    let projections = views.iter().map(|v| v.projection()).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut tracks = Vec::new();
    for (id, x) in points.iter().enumerate() {
        let mut observations = Vec::with_capacity(views.len());
        for (v, (view, p)) in views.iter().zip(&projections).enumerate() {
            let dx: f64 = StandardNormal.sample(&mut rng);
            let dy: f64 = StandardNormal.sample(&mut rng);
            let detected = rng.random::<f64>() < noise.detect_prob;
            if p.depth_sign(x) <= 0.0 {
                continue;
            }
            let Ok(exact) = p.project_pixel(x) else { continue };
            if !view.contains(&exact) {
                continue;
            }
            let mut pixel = exact + Vector2::new(dx, dy) * noise.sigma_px;
            if noise.quantize {
                pixel = pixel.map(quantize);
            }
            if view.contains(&pixel) && detected {
                observations.push(Observation { view: v, pixel });
            }
        }
        if observations.len() >= 2 {
            tracks.push(Track::new(id as u64, observations)?);
        }
    }
    Ok(tracks)
}

/// Inputs a synthetic scene was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub object: ObjectModel,
    pub rig: RigSpec,
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub ground_truth: Vec<HomoPoint3>,
    pub views: Vec<CameraView>,
    /// `point_id` indexes `ground_truth`.
    pub tracks: Vec<Track>,
    pub provenance: Provenance,
}

impl SyntheticScene {
    pub fn generate(object: &ObjectModel, rig: &RigSpec, noise: &NoiseModel) -> Result<Self> {
        let ground_truth = make_object(object)?;
        let views = make_rig(rig)?;
        let tracks = render_tracks(&views, &ground_truth, noise)?;
        Ok(SyntheticScene {
            ground_truth,
            views,
            tracks,
            provenance: Provenance {
                object: object.clone(),
                rig: rig.clone(),
                noise: noise.clone(),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulation::triangulate_linear;

    fn angle(left: f64, right: f64) -> RigSpec {
        RigSpec {
            left_angle_deg: left,
            right_angle_deg: right,
            ..RigSpec::default()
        }
    }

    fn distance(offsets: [f64; 3]) -> RigSpec {
        RigSpec {
            kind: RigKind::Distance,
            camera_offsets_cm: offsets,
            ..RigSpec::default()
        }
    }

    #[test]
    fn planar_grid_corners() {
        let model = ObjectModel {
            grid_counts: [3, 3],
            ..ObjectModel::default()
        };
        let pts = make_object(&model).unwrap();
        assert_eq!(pts.len(), 9);
        for corner in [(-5.0, -5.0), (-5.0, 5.0), (5.0, -5.0), (5.0, 5.0)] {
            assert!(pts.iter().any(|p| p.0 == nalgebra::Vector4::new(corner.0, corner.1, 0.0, 1.0)));
        }
    }

    #[test]
    fn random_box_is_deterministic_and_bounded() {
        let model = ObjectModel {
            kind: ObjectKind::RandomBox,
            extents: [2.0, 2.0, 2.0],
            point_count: 100,
            seed: 9,
            ..ObjectModel::default()
        };
        let a = make_object(&model).unwrap();
        assert_eq!(a, make_object(&model).unwrap());
        assert!(a.iter().all(|p| p.0.xyz().iter().all(|c| (-1.0..=1.0).contains(c))));
        let other = make_object(&ObjectModel { seed: 10, ..model }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn too_few_points_rejected() {
        let model = ObjectModel {
            grid_counts: [2, 3],
            ..ObjectModel::default()
        };
        assert!(matches!(make_object(&model), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn angle_rig_geometry() {
        for (l, r) in [(5.33, 16.79), (10.72, 8.74), (9.46, 13.18)] {
            let views = make_angle_rig(&angle(l, r)).unwrap();
            assert_eq!(views.len(), 3);
            for v in &views {
                assert!((v.center.norm() - 21.0).abs() < 1e-12);
                let px = v.projection().unwrap().project_pixel(&HomoPoint3::new(0.0, 0.0, 0.0, 1.0)).unwrap();
                assert!((px - Vector2::new(1920.0, 1080.0)).norm() < 0.5);
            }
            let azimuth = |v: &CameraView| v.center.x.atan2(v.center.z).to_degrees();
            assert!((azimuth(&views[0]) + l).abs() < 1e-9);
            assert!(azimuth(&views[1]).abs() < 1e-12);
            assert!((azimuth(&views[2]) - r).abs() < 1e-9);
        }
    }

    #[test]
    fn angle_limits() {
        assert!(make_angle_rig(&angle(0.0, 10.0)).is_err());
        assert!(make_angle_rig(&angle(10.0, 90.0)).is_err());
        assert!(make_angle_rig(&angle(89.9, 0.1)).is_ok());
    }

    #[test]
    fn distance_rig_geometry() {
        for offsets in [[1.73, 5.33, 7.2], [0.0, 1.73, 3.46]] {
            let views = make_distance_rig(&distance(offsets)).unwrap();
            let (a, b, c) = (views[0].center, views[1].center, views[2].center);
            assert!((b - a).cross(&(c - a)).norm() < 1e-12);
            for (v, o) in views.iter().zip(offsets) {
                assert!((v.center.x - (o - 5.33)).abs() < 1e-12);
                assert_eq!(v.center.z, 21.0);
            }
        }
        let bisector = make_distance_rig(&distance([1.73, 5.33, 7.2])).unwrap();
        assert_eq!(bisector[1].center, Vector3::new(0.0, 0.0, 21.0));
        assert!(make_distance_rig(&distance([1.0, 1.0, 2.0])).is_err());
        assert!(make_distance_rig(&distance([3.0, 2.0, 4.0])).is_err());
    }

    #[test]
    fn exact_tracks_recover_ground_truth() {
        let noise = NoiseModel {
            sigma_px: 0.0,
            ..NoiseModel::default()
        };
        let scene = SyntheticScene::generate(&ObjectModel::default(), &RigSpec::default(), &noise).unwrap();
        assert_eq!(scene.tracks.len(), 100);
        let projections: Vec<_> = scene.views.iter().map(|v| v.projection().unwrap()).collect();
        for t in &scene.tracks {
            assert_eq!(t.len(), 3);
            let res = triangulate_linear(&projections, t).unwrap();
            let gt = scene.ground_truth[t.point_id as usize].to_euclidean().unwrap();
            assert!((res.position() - gt).norm() < 1e-9);
        }
    }

    #[test]
    fn quantization_bound_and_visibility() {
        let noise = NoiseModel {
            sigma_px: 0.0,
            quantize: true,
            ..NoiseModel::default()
        };
        let rig = RigSpec {
            resolution: Resolution::LOW,
            ..RigSpec::default()
        };
        let scene = SyntheticScene::generate(&ObjectModel::default(), &rig, &noise).unwrap();
        let projections: Vec<_> = scene.views.iter().map(|v| v.projection().unwrap()).collect();
        for t in &scene.tracks {
            for o in t.observations() {
                assert!(scene.views[o.view].contains(&o.pixel));
                let exact = projections[o.view].project_pixel(&scene.ground_truth[t.point_id as usize]).unwrap();
                assert!((o.pixel - exact).amax() <= 0.5);
                assert_eq!(o.pixel.x.fract(), 0.5);
            }
        }
    }

    #[test]
    fn quantization_error_halves_with_resolution() {
        let object = ObjectModel {
            kind: ObjectKind::RandomBox,
            extents: [10.0, 10.0, 4.0],
            point_count: 10_000,
            seed: 3,
            ..ObjectModel::default()
        };
        let noise = NoiseModel {
            sigma_px: 0.0,
            quantize: true,
            ..NoiseModel::default()
        };
        let mean_angular = |res: Resolution, focal: f64| {
            let rig = RigSpec {
                resolution: res,
                focal_pixels: Some(focal),
                ..RigSpec::default()
            };
            let scene = SyntheticScene::generate(&object, &rig, &noise).unwrap();
            let projections: Vec<_> = scene.views.iter().map(|v| v.projection().unwrap()).collect();
            let (mut sum, mut n) = (0.0, 0usize);
            for t in &scene.tracks {
                for o in t.observations() {
                    let exact = projections[o.view].project_pixel(&scene.ground_truth[t.point_id as usize]).unwrap();
                    sum += (o.pixel - exact).norm() / focal;
                    n += 1;
                }
            }
            sum / n as f64
        };
        let coarse = mean_angular(Resolution::new(1000, 800).unwrap(), 800.0);
        let fine = mean_angular(Resolution::new(2000, 1600).unwrap(), 1600.0);
        assert!((coarse / fine - 2.0).abs() < 0.1, "{}", coarse / fine);
    }

    #[test]
    fn dropout_keeps_noise_streams_aligned() {
        let base = NoiseModel {
            sigma_px: 1.0,
            seed: 5,
            ..NoiseModel::default()
        };
        let sparse = NoiseModel {
            detect_prob: 0.7,
            ..base.clone()
        };
        let object = ObjectModel::default();
        let rig = RigSpec::default();
        let full = SyntheticScene::generate(&object, &rig, &base).unwrap();
        let thin = SyntheticScene::generate(&object, &rig, &sparse).unwrap();
        assert!(thin.tracks.len() < full.tracks.len());
        for t in &thin.tracks {
            let f = &full.tracks[t.point_id as usize];
            for o in t.observations() {
                assert!(f.observations().contains(o));
            }
        }
    }

    #[test]
    fn resolution_serde() {
        let r: Resolution = serde_json::from_str("\"fullhd\"").unwrap();
        assert_eq!(r, Resolution::FULLHD);
        let r: Resolution = serde_json::from_str("[640, 480]").unwrap();
        assert_eq!(r, Resolution { width: 640, height: 480 });
        assert_eq!(serde_json::to_string(&Resolution::NATIVE).unwrap(), "\"native\"");
        assert!(serde_json::from_str::<Resolution>("\"8k\"").is_err());
        assert!(serde_json::from_str::<Resolution>("[0, 480]").is_err());
    }

    #[test]
    fn focal_scales_with_width() {
        let rig = RigSpec {
            resolution: Resolution::FULLHD,
            ..RigSpec::default()
        };
        assert!((rig.effective_focal_pixels() - 3200.0 * 1920.0 / 4032.0).abs() < 1e-12);
    }
}
