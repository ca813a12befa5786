//! Homogeneous-coordinate pinhole camera model.
//!
//! A camera is described by its calibration matrix `K`, a world-to-camera
//! rotation `R` and its center `C` in world coordinates. The projection
//! matrix is `P = K R [I | -C]`, mapping homogeneous scene points to
//! homogeneous pixels.

use nalgebra::{DMatrix, Matrix3, Matrix3x4, RowVector4, Vector2, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::numeric::smallest_singular_vector;

/// Frobenius tolerance on `R^T R - I` (and on `det R - 1`).
pub const ROTATION_TOLERANCE: f64 = 1e-10;
/// Projections with `|w|` below this lie on the principal plane.
pub const PRINCIPAL_PLANE_EPS: f64 = 1e-14;
const RANK_TOLERANCE: f64 = 1e-8;
const BASELINE_TOLERANCE: f64 = 1e-12;

/// A point of projective 3-space, `(x1, x2, x3, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoPoint3(pub Vector4<f64>);

impl HomoPoint3 {
    pub fn new(x1: f64, x2: f64, x3: f64, w: f64) -> Self {
        HomoPoint3(Vector4::new(x1, x2, x3, w))
    }

    pub fn from_euclidean(p: &Vector3<f64>) -> Self {
        HomoPoint3(p.push(1.0))
    }

    pub fn w(&self) -> f64 {
        self.0[3]
    }

    pub fn is_finite_point(&self) -> bool {
        self.0[3] != 0.0
    }

    /// Dehomogenized coordinates, or `None` for points at infinity.
    pub fn to_euclidean(&self) -> Option<Vector3<f64>> {
        if self.0[3] == 0.0 {
            None
        } else {
            Some(self.0.xyz() / self.0[3])
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        HomoPoint3(self.0 * lambda)
    }
}

/// A point of the projective plane, `(u, v, w)`; pixels when `w = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoPoint2(pub Vector3<f64>);

impl HomoPoint2 {
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        HomoPoint2(Vector3::new(u, v, w))
    }

    pub fn pixel(u: f64, v: f64) -> Self {
        HomoPoint2(Vector3::new(u, v, 1.0))
    }

    pub fn from_pixel(p: &Vector2<f64>) -> Self {
        HomoPoint2(p.push(1.0))
    }

    pub fn w(&self) -> f64 {
        self.0[2]
    }

    pub fn to_pixel(&self) -> Option<Vector2<f64>> {
        if self.0[2] == 0.0 {
            None
        } else {
            Some(self.0.xy() / self.0[2])
        }
    }
}

/// Intrinsic parameters. `K = [[sx f, a, ox], [0, sy f, oy], [0, 0, 1]]`
/// with the principal point `(ox, oy)` already expressed in pixels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics {
    pub f: f64,
    pub sx: f64,
    pub sy: f64,
    pub ox: f64,
    pub oy: f64,
    pub a: f64,
}

impl CameraIntrinsics {
    pub fn new(f: f64, sx: f64, sy: f64, ox: f64, oy: f64, a: f64) -> Result<Self> {
        let k = CameraIntrinsics { f, sx, sy, ox, oy, a };
        k.validate()?;
        Ok(k)
    }

    /// Unit focal length with square pixels of density `focal_pixels`.
    pub fn from_focal_pixels(focal_pixels: f64, ox: f64, oy: f64) -> Result<Self> {
        Self::new(1.0, focal_pixels, focal_pixels, ox, oy, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.f) && positive(self.sx) && positive(self.sy)) {
            return Err(Error::Domain(format!(
                "intrinsics need f, sx, sy > 0 (got f={}, sx={}, sy={})",
                self.f, self.sx, self.sy
            )));
        }
        if !(self.ox.is_finite() && self.oy.is_finite() && self.a.is_finite()) {
            return Err(Error::Domain("intrinsics must be finite".into()));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.sx * self.f,
            self.a,
            self.ox,
            0.0,
            self.sy * self.f,
            self.oy,
            0.0,
            0.0,
            1.0,
        )
    }
}

/// A calibrated camera with pose and image size.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraView {
    pub intrinsics: CameraIntrinsics,
    /// World-to-camera rotation.
    pub rotation: Matrix3<f64>,
    /// Camera center in world coordinates.
    pub center: Vector3<f64>,
    pub image_width: u32,
    pub image_height: u32,
}

/// Result of projecting a scene point through a [`CameraView`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub point: HomoPoint2,
    /// True when the point lies in front of the camera.
    pub in_front: bool,
}

impl CameraView {
    pub fn new(
        intrinsics: CameraIntrinsics,
        rotation: Matrix3<f64>,
        center: Vector3<f64>,
        image_width: u32,
        image_height: u32,
    ) -> Result<Self> {
        intrinsics.validate()?;
        check_rotation(&rotation)?;
        if image_width == 0 || image_height == 0 {
            return Err(Error::Domain("image size must be positive".into()));
        }
        Ok(CameraView {
            intrinsics,
            rotation,
            center,
            image_width,
            image_height,
        })
    }

    /// Camera at `center` whose optical axis passes through `target`.
    ///
    /// The image x axis points to the right and the image y axis points
    /// along `-up`, so `up` appears at the top of the image.
    pub fn look_at(
        intrinsics: CameraIntrinsics,
        center: Vector3<f64>,
        target: Vector3<f64>,
        up: Vector3<f64>,
        image_width: u32,
        image_height: u32,
    ) -> Result<Self> {
        let forward = target - center;
        if forward.norm() < BASELINE_TOLERANCE {
            return Err(Error::Domain("look-at target coincides with center".into()));
        }
        let z = forward.normalize();
        let x = z.cross(&up);
        if x.norm() < 1e-12 {
            return Err(Error::Domain("up vector is parallel to the view axis".into()));
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let rotation = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        Self::new(intrinsics, rotation, center, image_width, image_height)
    }

    pub fn projection(&self) -> Result<ProjectionMatrix> {
        compose_projection(self)
    }

    pub fn contains(&self, pixel: &Vector2<f64>) -> bool {
        pixel.x >= 0.0
            && pixel.y >= 0.0
            && pixel.x < self.image_width as f64
            && pixel.y < self.image_height as f64
    }
}

fn check_rotation(r: &Matrix3<f64>) -> Result<()> {
    let deviation = (r.transpose() * r - Matrix3::identity()).norm();
    let det_dev = (r.determinant() - 1.0).abs();
    if !(deviation < ROTATION_TOLERANCE && det_dev < ROTATION_TOLERANCE) {
        return Err(Error::InvalidRotation {
            deviation: deviation.max(det_dev),
        });
    }
    Ok(())
}

/// A 3x4 camera projection matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionMatrix(pub Matrix3x4<f64>);

impl ProjectionMatrix {
    pub fn new(m: Matrix3x4<f64>) -> Self {
        ProjectionMatrix(m)
    }

    pub fn from_row_major(entries: &[f64; 12]) -> Self {
        ProjectionMatrix(Matrix3x4::from_row_slice(entries))
    }

    pub fn to_row_major(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                out[r * 4 + c] = self.0[(r, c)];
            }
        }
        out
    }

    pub fn matrix(&self) -> &Matrix3x4<f64> {
        &self.0
    }

    pub fn row(&self, i: usize) -> RowVector4<f64> {
        self.0.row(i).into_owned()
    }

    /// The left 3x3 block `M = K R`.
    pub fn left_block(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        ProjectionMatrix(self.0 * lambda)
    }

    /// `P X` without any degeneracy check.
    pub fn apply(&self, x: &HomoPoint3) -> HomoPoint2 {
        HomoPoint2(self.0 * x.0)
    }

    /// Projects and dehomogenizes, failing on the principal plane.
    pub fn project_pixel(&self, x: &HomoPoint3) -> Result<Vector2<f64>> {
        let h = self.0 * x.0;
        if h[2].abs() < PRINCIPAL_PLANE_EPS {
            return Err(Error::DegeneratePoint { w: h[2] });
        }
        Ok(h.xy() / h[2])
    }

    /// Signed depth indicator: positive when `x` is in front of the camera.
    pub fn depth_sign(&self, x: &HomoPoint3) -> f64 {
        let w = (self.0 * x.0)[2];
        self.left_block().determinant().signum() * w * x.w()
    }

    pub fn center(&self) -> Result<HomoPoint3> {
        camera_center(self)
    }
}

/// Projects `point` through `view`. Points behind the camera are still
/// projected; `in_front` reports cheirality.
pub fn project(view: &CameraView, point: &HomoPoint3) -> Result<Projection> {
    let p = compose_projection(view)?;
    let h = p.apply(point);
    if h.w().abs() < PRINCIPAL_PLANE_EPS {
        return Err(Error::DegeneratePoint { w: h.w() });
    }
    let in_front = p.depth_sign(point) > 0.0;
    Ok(Projection {
        point: HomoPoint2(h.0 / h.w()),
        in_front,
    })
}

/// `P = K R [I | -C]`.
pub fn compose_projection(view: &CameraView) -> Result<ProjectionMatrix> {
    check_rotation(&view.rotation)?;
    let kr = view.intrinsics.matrix() * view.rotation;
    let t = -(kr * view.center);
    let mut m = Matrix3x4::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&kr);
    m.set_column(3, &t);
    Ok(ProjectionMatrix(m))
}

/// Right null vector of `P`, normalized to `w = 1` for finite cameras.
pub fn camera_center(p: &ProjectionMatrix) -> Result<HomoPoint3> {
    let sv = p.0.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smax.is_nan() || smax <= 0.0 || smin / smax < RANK_TOLERANCE {
        return Err(Error::RankDeficient {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    let m = p.left_block();
    // Finite camera: C = -M^-1 p4 is more accurate than the SVD null vector.
    if let Some(c) = m.lu().solve(&(-p.0.column(3).into_owned())) {
        if c.iter().all(|v| v.is_finite()) {
            return Ok(HomoPoint3::from_euclidean(&c));
        }
    }
    let a = DMatrix::from_iterator(3, 4, p.0.iter().copied());
    let v = smallest_singular_vector(&a);
    let h = Vector4::new(v[0], v[1], v[2], v[3]);
    if h[3].abs() > 1e-12 {
        Ok(HomoPoint3(h / h[3]))
    } else {
        Ok(HomoPoint3(Vector4::new(h[0], h[1], h[2], 0.0)))
    }
}

/// Skew-symmetric matrix with `cross_matrix(a) * b = a x b`.
pub fn cross_matrix(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Fundamental matrix `F = [e2]_x P2 P1^+` with `x2^T F x1 = 0`,
/// scaled to unit Frobenius norm.
pub fn fundamental_from_projections(
    p1: &ProjectionMatrix,
    p2: &ProjectionMatrix,
) -> Result<Matrix3<f64>> {
    let c1 = camera_center(p1)?;
    let c2 = camera_center(p2)?;
    if let (Some(a), Some(b)) = (c1.to_euclidean(), c2.to_euclidean()) {
        let baseline = (a - b).norm();
        if baseline < BASELINE_TOLERANCE {
            return Err(Error::CoincidentCenters { baseline });
        }
    }
    let e2 = p2.0 * c1.0;
    let pinv = p1
        .0
        .pseudo_inverse(1e-15)
        .map_err(|_| Error::RankDeficient { ratio: 0.0 })?;
    let f = cross_matrix(&e2) * p2.0 * pinv;
    let norm = f.norm();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::CoincidentCenters { baseline: 0.0 });
    }
    Ok(f / norm)
}

/// Right and left epipoles `(e1, e2)` of `F` as unit vectors:
/// `F e1 = 0`, `F^T e2 = 0`.
pub fn epipoles(f: &Matrix3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = DMatrix::from_iterator(3, 3, f.iter().copied());
    let e1 = smallest_singular_vector(&a);
    let e2 = smallest_singular_vector(&a.transpose());
    (
        Vector3::new(e1[0], e1[1], e1[2]),
        Vector3::new(e2[0], e2[1], e2[2]),
    )
}
