use nalgebra::DMatrix;

use super::{Method, Track, TriangulationResult};
use crate::error::{Error, Result};
use crate::geometry::ProjectionMatrix;
use crate::numeric::smallest_singular_vector;

const INFINITY_W: f64 = 1e-12;

/// Homogeneous linear triangulation.
///
/// Each observation `(u, v)` in view `P` contributes the rows
/// `u P3 - P1` and `v P3 - P2`. Before stacking, every view is conditioned
/// by translating its observation to the image origin and scaling the two
/// rows to unit joint norm, so that no view dominates the solve because of
/// its pixel scale.
pub fn triangulate_linear(views: &[ProjectionMatrix], track: &Track) -> Result<TriangulationResult> {
    track.check(views.len())?;
    let obs = track.observations();
    let mut a = DMatrix::zeros(2 * obs.len(), 4);
    for (i, o) in obs.iter().enumerate() {
        let p = &views[o.view];
        let (p1, p2, p3) = (p.row(0), p.row(1), p.row(2));
        let r1 = p1 - p3 * o.pixel.x;
        let r2 = p2 - p3 * o.pixel.y;
        let norm = (r1.norm_squared() + r2.norm_squared()).sqrt();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::Domain(format!("view {} has a null projection", o.view)));
        }
        a.row_mut(2 * i).copy_from(&(r1 / norm));
        a.row_mut(2 * i + 1).copy_from(&(r2 / norm));
    }
    let x = smallest_singular_vector(&a);
    if x[3].abs() < INFINITY_W {
        return Err(Error::PointAtInfinity);
    }
    let point = x.fixed_rows::<3>(0) / x[3];
    TriangulationResult::evaluate(views, track, point, Method::Linear, true)
}
