use nalgebra::{DVector, Vector3};

use super::{linear::triangulate_linear, Method, Track, TriangulationResult};
use crate::error::{Error, Result};
use crate::geometry::{HomoPoint3, ProjectionMatrix, PRINCIPAL_PLANE_EPS};
use crate::numeric::{lm_minimize, LeastSquaresProblem, LmSettings, Termination};

/// Reprojection residuals of a single scene point: two pixel components per
/// observation, `(u_proj - u_obs, v_proj - v_obs)`.
pub struct ReprojectionProblem<'a> {
    views: &'a [ProjectionMatrix],
    track: &'a Track,
}

impl<'a> ReprojectionProblem<'a> {
    pub fn new(views: &'a [ProjectionMatrix], track: &'a Track) -> Result<Self> {
        track.check(views.len())?;
        Ok(ReprojectionProblem { views, track })
    }
}

impl LeastSquaresProblem for ReprojectionProblem<'_> {
    fn param_count(&self) -> usize {
        3
    }

    fn residual_count(&self) -> usize {
        2 * self.track.len()
    }

    fn residuals(&self, params: &DVector<f64>) -> DVector<f64> {
        let x = nalgebra::Vector4::new(params[0], params[1], params[2], 1.0);
        let mut r = DVector::zeros(self.residual_count());
        for (i, o) in self.track.observations().iter().enumerate() {
            let h = self.views[o.view].0 * x;
            if h.z.abs() < PRINCIPAL_PLANE_EPS {
                r[2 * i] = f64::NAN;
                r[2 * i + 1] = f64::NAN;
                continue;
            }
            r[2 * i] = h.x / h.z - o.pixel.x;
            r[2 * i + 1] = h.y / h.z - o.pixel.y;
        }
        r
    }
}

/// [`ReprojectionProblem`] over the offset `d` from an anchor point `x0`.
///
/// Each residual is rewritten as `(b + a . d) / (c + g . d)` with the
/// observation folded into the numerator rows, so near the anchor its
/// magnitude is that of the residual rather than of the pixel coordinate.
/// This keeps rounding noise out of the finite-difference Jacobian.
struct AnchoredProblem {
    /// Per residual: numerator constant and gradient, denominator constant
    /// and gradient.
    rows: Vec<(f64, Vector3<f64>, f64, Vector3<f64>)>,
}

impl AnchoredProblem {
    fn new(views: &[ProjectionMatrix], track: &Track, x0: &Vector3<f64>) -> Self {
        let xh = nalgebra::Vector4::new(x0.x, x0.y, x0.z, 1.0);
        let mut rows = Vec::with_capacity(2 * track.len());
        for o in track.observations() {
            let p = &views[o.view];
            let w = p.row(2);
            for (k, obs) in [o.pixel.x, o.pixel.y].into_iter().enumerate() {
                let num = p.row(k) - w * obs;
                rows.push((
                    num.dot(&xh.transpose()),
                    num.fixed_columns::<3>(0).transpose(),
                    w.dot(&xh.transpose()),
                    w.fixed_columns::<3>(0).transpose(),
                ));
            }
        }
        AnchoredProblem { rows }
    }
}

impl LeastSquaresProblem for AnchoredProblem {
    fn param_count(&self) -> usize {
        3
    }

    fn residual_count(&self) -> usize {
        self.rows.len()
    }

    fn residuals(&self, params: &DVector<f64>) -> DVector<f64> {
        let d = Vector3::new(params[0], params[1], params[2]);
        DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|(b, a, c, g)| {
                let w = c + g.dot(&d);
                if w.abs() < PRINCIPAL_PLANE_EPS {
                    f64::NAN
                } else {
                    (b + a.dot(&d)) / w
                }
            }),
        )
    }
}

/// Midpoint of the common perpendicular of the back-projected rays of the
/// first two observations.
pub fn ray_midpoint(views: &[ProjectionMatrix], track: &Track) -> Result<Vector3<f64>> {
    track.check(views.len())?;
    let ray = |k: usize| -> Result<(Vector3<f64>, Vector3<f64>)> {
        let o = track.observations()[k];
        let p = &views[o.view];
        let center = p
            .center()?
            .to_euclidean()
            .ok_or(Error::InitializationFailed)?;
        let m_inv = p
            .left_block()
            .try_inverse()
            .ok_or(Error::InitializationFailed)?;
        let dir = m_inv * Vector3::new(o.pixel.x, o.pixel.y, 1.0);
        Ok((center, dir.normalize()))
    };
    let (c1, d1) = ray(0)?;
    let (c2, d2) = ray(1)?;
    let w0 = c1 - c2;
    let b = d1.dot(&d2);
    let denom = 1.0 - b * b;
    if denom < 1e-14 {
        return Err(Error::InitializationFailed);
    }
    let d = d1.dot(&w0);
    let e = d2.dot(&w0);
    let s = (b * e - d) / denom;
    let t = (e - b * d) / denom;
    Ok(((c1 + d1 * s) + (c2 + d2 * t)) / 2.0)
}

/// Minimizes the summed squared reprojection error over the scene point
/// with Levenberg–Marquardt, starting from [`triangulate_linear`].
pub fn triangulate_nview_lm(views: &[ProjectionMatrix], track: &Track) -> Result<TriangulationResult> {
    triangulate_nview_lm_with(views, track, &LmSettings::default())
}

pub fn triangulate_nview_lm_with(
    views: &[ProjectionMatrix],
    track: &Track,
    settings: &LmSettings,
) -> Result<TriangulationResult> {
    track.check(views.len())?;
    let start = match triangulate_linear(views, track) {
        Ok(r) => r.position(),
        Err(Error::PointAtInfinity) => {
            ray_midpoint(views, track).map_err(|_| Error::InitializationFailed)?
        }
        Err(e) => return Err(e),
    };
    // The second pass re-anchors at the first solution, where the offsets
    // are tiny and the Jacobian is computed with the least rounding.
    let mut point = start;
    let mut converged = false;
    for _ in 0..2 {
        let problem = AnchoredProblem::new(views, track, &point);
        let outcome = match lm_minimize(&problem, &DVector::zeros(3), settings) {
            Ok(o) => o,
            Err(Error::NonFiniteResidual) => return Err(Error::InitializationFailed),
            Err(e) => return Err(e),
        };
        point += Vector3::new(outcome.solution[0], outcome.solution[1], outcome.solution[2]);
        converged = outcome.termination != Termination::MaxIterations;
    }
    let result = TriangulationResult::evaluate(views, track, point, Method::NViewLm, converged)?;
    debug_assert!(HomoPoint3::from_euclidean(&point).is_finite_point());
    Ok(result)
}
