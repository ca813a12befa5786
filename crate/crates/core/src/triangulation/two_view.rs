use nalgebra::{DMatrix, Matrix3, Vector3};

use super::{linear::triangulate_linear, Method, Observation, Track, TriangulationResult};
use crate::error::{Error, Result};
use crate::geometry::{fundamental_from_projections, HomoPoint2, ProjectionMatrix};
use crate::numeric::{real_roots, smallest_singular_vector, Polynomial};

const EPIPOLE_EPS: f64 = 1e-12;
const RANK_TWO_TOLERANCE: f64 = 1e-6;
const TIE_RELATIVE: f64 = 1e-14;

/// A correspondence moved onto matching epipolar lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedPair {
    pub x1: HomoPoint2,
    pub x2: HomoPoint2,
    /// Pencil parameter of the chosen epipolar line; infinite when the
    /// optimum is the asymptotic line.
    pub t_star: f64,
    /// Sum of squared correction distances, pixels squared.
    pub cost: f64,
}

/// Coefficient helpers over ascending-order polynomials.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64], b_scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += b_scale * y;
    }
    out
}

/// Parameters of the canonical form
/// `F = [[f1 f2 d, -f2 c, -f2 d], [-f1 b, a, b], [-f1 d, c, d]]`.
struct Canonical {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    f1: f64,
    f2: f64,
}

impl Canonical {
    fn cost(&self, t: f64) -> f64 {
        let Canonical { a, b, c, d, f1, f2 } = *self;
        if t.is_infinite() {
            return 1.0 / (f1 * f1) + c * c / (a * a + f2 * f2 * c * c);
        }
        let ct_d = c * t + d;
        let at_b = a * t + b;
        t * t / (1.0 + f1 * f1 * t * t) + ct_d * ct_d / (at_b * at_b + f2 * f2 * ct_d * ct_d)
    }

    /// `g(t) = t ((a t + b)^2 + f2^2 (c t + d)^2)^2
    ///        - (a d - b c) (1 + f1^2 t^2)^2 (a t + b)(c t + d)`
    fn stationary_polynomial(&self) -> Vec<f64> {
        let Canonical { a, b, c, d, f1, f2 } = *self;
        let at_b = [b, a];
        let ct_d = [d, c];
        let q = poly_add(&poly_mul(&at_b, &at_b), &poly_mul(&ct_d, &ct_d), f2 * f2);
        let term1 = poly_mul(&[0.0, 1.0], &poly_mul(&q, &q));
        let s = [1.0, 0.0, f1 * f1];
        let term2 = poly_mul(&poly_mul(&s, &s), &poly_mul(&at_b, &ct_d));
        poly_add(&term1, &term2, -(a * d - b * c))
    }

    /// Epipolar lines in the canonical frames for pencil parameter `t`.
    fn lines(&self, t: f64) -> (Vector3<f64>, Vector3<f64>) {
        let Canonical { a, b, c, d, f1, f2 } = *self;
        if t.is_infinite() {
            (Vector3::new(f1, 0.0, -1.0), Vector3::new(-f2 * c, a, c))
        } else {
            (
                Vector3::new(t * f1, 1.0, -t),
                Vector3::new(-f2 * (c * t + d), a * t + b, c * t + d),
            )
        }
    }
}

/// Closest point to the origin on the line `(l0, l1, l2)`.
fn foot_of_origin(l: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(-l.x * l.z, -l.y * l.z, l.x * l.x + l.y * l.y)
}

/// Inverse of the similarity taking `p` to the origin and shrinking
/// lengths by `scale`.
fn similarity_inverse(p: &nalgebra::Vector2<f64>, scale: f64) -> Matrix3<f64> {
    Matrix3::new(scale, 0.0, p.x, 0.0, scale, p.y, 0.0, 0.0, 1.0)
}

fn rotation_to_x_axis(e: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(e.x, e.y, 0.0, -e.y, e.x, 0.0, 0.0, 0.0, 1.0)
}

/// Null vector scaled so that `e.x^2 + e.y^2 = 1`.
fn planar_unit_null(m: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let v = smallest_singular_vector(&DMatrix::from_iterator(3, 3, m.iter().copied()));
    let e = Vector3::new(v[0], v[1], v[2]);
    let planar = (e.x * e.x + e.y * e.y).sqrt();
    if planar < EPIPOLE_EPS {
        return Err(Error::EpipoleAtPoint);
    }
    Ok(e / planar)
}

/// Optimal correction of a correspondence under the epipolar constraint.
///
/// Finds the pair `(x1', x2')` with `x2'^T F x1' = 0` that minimizes
/// `d(x1, x1')^2 + d(x2, x2')^2`. Both images are moved so the observation
/// sits at the origin and rotated so the epipoles lie on the x axis; the
/// pencil of epipolar lines is then parametrized by `t` and the cost
/// `s(t)` is minimized by evaluating it at the real roots of its degree-6
/// stationarity polynomial and at `t -> infinity`.
pub fn hs_correct_pair(f: &Matrix3<f64>, x1: &HomoPoint2, x2: &HomoPoint2) -> Result<CorrectedPair> {
    let (p1, p2) = match (x1.to_pixel(), x2.to_pixel()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Domain("correspondence must be finite".into())),
    };
    let sv = f.singular_values();
    let mut sorted = [sv[0], sv[1], sv[2]];
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted[0].is_nan() || sorted[0] <= 0.0
        || sorted[1] / sorted[0] < 1e-12
        || sorted[2] / sorted[0] > RANK_TWO_TOLERANCE
    {
        return Err(Error::RankDeficientF);
    }
    // Working in units of the coordinate magnitude balances the entries of
    // a pixel-space F, which keeps the epipole computations accurate.
    let scale = p1.abs().max().max(p2.abs().max()).max(1.0);
    let t1_inv = similarity_inverse(&p1, scale);
    let t2_inv = similarity_inverse(&p2, scale);
    let ft = t2_inv.transpose() * f * t1_inv;
    let ft = ft / ft.norm();

    let e1 = planar_unit_null(&ft)?;
    let e2 = planar_unit_null(&ft.transpose())?;
    let r1 = rotation_to_x_axis(&e1);
    let r2 = rotation_to_x_axis(&e2);
    let fc = r2 * ft * r1.transpose();

    let canon = Canonical {
        a: fc[(1, 1)],
        b: fc[(1, 2)],
        c: fc[(2, 1)],
        d: fc[(2, 2)],
        f1: e1.z,
        f2: e2.z,
    };

    let mut candidates: Vec<f64> = match Polynomial::new(canon.stationary_polynomial()) {
        Ok(g) => real_roots(&g),
        Err(Error::DegenerateAllZero) => vec![0.0],
        Err(e) => return Err(e),
    };
    candidates.push(f64::INFINITY);

    let mut best: Option<(f64, f64)> = None;
    for t in candidates {
        let cost = canon.cost(t);
        if !cost.is_finite() {
            continue;
        }
        best = match best {
            None => Some((t, cost)),
            Some((bt, bc)) => {
                let tie = (cost - bc).abs() <= TIE_RELATIVE * bc;
                if (tie && t.abs() < bt.abs()) || (!tie && cost < bc) {
                    Some((t, cost))
                } else {
                    Some((bt, bc))
                }
            }
        };
    }
    let (t_star, cost) = best.ok_or(Error::RankDeficientF)?;
    let cost = cost * scale * scale;

    let (l1, l2) = canon.lines(t_star);
    let c1 = t1_inv * r1.transpose() * foot_of_origin(&l1);
    let c2 = t2_inv * r2.transpose() * foot_of_origin(&l2);
    if c1.z == 0.0 || c2.z == 0.0 {
        return Err(Error::EpipoleAtPoint);
    }
    Ok(CorrectedPair {
        x1: HomoPoint2(c1 / c1.z),
        x2: HomoPoint2(c2 / c2.z),
        t_star,
        cost,
    })
}

/// Optimal two-view triangulation: correct the pair, then intersect.
pub fn triangulate_two_view_optimal(
    p1: &ProjectionMatrix,
    p2: &ProjectionMatrix,
    x1: &HomoPoint2,
    x2: &HomoPoint2,
) -> Result<TriangulationResult> {
    let f = fundamental_from_projections(p1, p2)?;
    triangulate_two_view_optimal_with_f(p1, p2, &f, x1, x2)
}

/// As [`triangulate_two_view_optimal`] with a precomputed
/// `F = fundamental_from_projections(p1, p2)`.
pub fn triangulate_two_view_optimal_with_f(
    p1: &ProjectionMatrix,
    p2: &ProjectionMatrix,
    f: &Matrix3<f64>,
    x1: &HomoPoint2,
    x2: &HomoPoint2,
) -> Result<TriangulationResult> {
    let corrected = hs_correct_pair(f, x1, x2)?;
    let views = [*p1, *p2];
    let obs = |view, p: &HomoPoint2| -> Result<Observation> {
        Ok(Observation {
            view,
            pixel: p.to_pixel().ok_or_else(|| Error::Domain("pixel at infinity".into()))?,
        })
    };
    let corrected_track = Track::new(0, vec![obs(0, &corrected.x1)?, obs(1, &corrected.x2)?])?;
    let intersection = triangulate_linear(&views, &corrected_track)?;
    let original = Track::new(0, vec![obs(0, x1)?, obs(1, x2)?])?;
    TriangulationResult::evaluate(
        &views,
        &original,
        intersection.position(),
        Method::TwoViewOptimal,
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraIntrinsics, CameraView, HomoPoint3};
    use nalgebra::{Vector2, Vector3};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair() -> (ProjectionMatrix, ProjectionMatrix) {
        let k = CameraIntrinsics::from_focal_pixels(1200.0, 640.0, 360.0).unwrap();
        let mk = |c: Vector3<f64>| {
            CameraView::look_at(k, c, Vector3::zeros(), Vector3::y(), 1280, 720)
                .unwrap()
                .projection()
                .unwrap()
        };
        (mk(Vector3::new(-3.0, 0.4, 18.0)), mk(Vector3::new(4.0, -0.2, 17.0)))
    }

    fn epipolar_residual(f: &Matrix3<f64>, c: &CorrectedPair) -> f64 {
        let f = f / f.norm();
        c.x2.0.dot(&(f * c.x1.0))
    }

    #[test]
    fn consistent_pair_is_unchanged() {
        let (p1, p2) = pair();
        let f = fundamental_from_projections(&p1, &p2).unwrap();
        let x = HomoPoint3::new(0.5, -1.0, 1.5, 1.0);
        let x1 = HomoPoint2::from_pixel(&p1.project_pixel(&x).unwrap());
        let x2 = HomoPoint2::from_pixel(&p2.project_pixel(&x).unwrap());
        let c = hs_correct_pair(&f, &x1, &x2).unwrap();
        assert!((c.x1.0 - x1.0).norm() < 1e-9);
        assert!((c.x2.0 - x2.0).norm() < 1e-9);
        assert!(c.cost < 1e-18, "{}", c.cost);
    }

    #[test]
    fn perturbed_pair_lands_on_epipolar_lines() {
        let (p1, p2) = pair();
        let f = fundamental_from_projections(&p1, &p2).unwrap();
        let x = HomoPoint3::new(-1.0, 0.8, 0.2, 1.0);
        let x1 = HomoPoint2::from_pixel(&p1.project_pixel(&x).unwrap());
        let exact2 = p2.project_pixel(&x).unwrap();
        let x2 = HomoPoint2::from_pixel(&(exact2 + Vector2::new(0.6, 0.8)));
        let c = hs_correct_pair(&f, &x1, &x2).unwrap();
        assert!(epipolar_residual(&f, &c).abs() < 1e-8);
        assert!(c.cost <= 1.0 + 1e-12);
        let moved = (c.x1.0 - x1.0).norm_squared() + (c.x2.0 - x2.0).norm_squared();
        assert!((moved - c.cost).abs() < 1e-9 * (1.0 + c.cost));
    }

    #[test]
    fn rank_three_f_rejected() {
        let f = Matrix3::identity();
        let x = HomoPoint2::pixel(1.0, 2.0);
        assert!(matches!(hs_correct_pair(&f, &x, &x), Err(Error::RankDeficientF)));
    }

    #[test]
    fn epipole_at_point_rejected() {
        // Rows orthogonal to (100, 50, 1): the right epipole is pixel (100, 50).
        let f = Matrix3::new(1.0, -2.0, 0.0, 0.0, 1.0, -50.0, 1.0, -1.0, -50.0);
        let x1 = HomoPoint2::pixel(100.0, 50.0);
        let x2 = HomoPoint2::pixel(600.0, 300.0);
        assert!(matches!(hs_correct_pair(&f, &x1, &x2), Err(Error::EpipoleAtPoint)));
    }

    #[test]
    fn noise_free_matches_linear() {
        let (p1, p2) = pair();
        let x = HomoPoint3::new(1.1, 0.3, -0.9, 1.0);
        let u1 = p1.project_pixel(&x).unwrap();
        let u2 = p2.project_pixel(&x).unwrap();
        let opt = triangulate_two_view_optimal(
            &p1,
            &p2,
            &HomoPoint2::from_pixel(&u1),
            &HomoPoint2::from_pixel(&u2),
        )
        .unwrap();
        let track = Track::new(
            0,
            vec![Observation { view: 0, pixel: u1 }, Observation { view: 1, pixel: u2 }],
        )
        .unwrap();
        let lin = triangulate_linear(&[p1, p2], &track).unwrap();
        assert!((opt.position() - lin.position()).norm() < 1e-9);
        assert_eq!(opt.method, Method::TwoViewOptimal);
    }

    #[test]
    fn optimal_never_worse_than_linear() {
        let (p1, p2) = pair();
        let f = fundamental_from_projections(&p1, &p2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x = HomoPoint3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                1.0,
            );
            let noise = |rng: &mut ChaCha8Rng| Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let u1 = p1.project_pixel(&x).unwrap() + noise(&mut rng);
            let u2 = p2.project_pixel(&x).unwrap() + noise(&mut rng);
            let opt = triangulate_two_view_optimal_with_f(
                &p1,
                &p2,
                &f,
                &HomoPoint2::from_pixel(&u1),
                &HomoPoint2::from_pixel(&u2),
            )
            .unwrap();
            let track = Track::new(
                0,
                vec![Observation { view: 0, pixel: u1 }, Observation { view: 1, pixel: u2 }],
            )
            .unwrap();
            let lin = triangulate_linear(&[p1, p2], &track).unwrap();
            assert!(opt.geometric_error <= lin.geometric_error + 1e-9);
        }
    }

    #[test]
    fn canonical_form_matches_construction() {
        // Build F in canonical form from chosen parameters and check the
        // polynomial vanishes at stationary points of the cost.
        let canon = Canonical { a: 0.7, b: -0.3, c: 0.4, d: 0.25, f1: 0.3, f2: -0.5 };
        let g = Polynomial::new(canon.stationary_polynomial()).unwrap();
        let roots = real_roots(&g);
        assert!(!roots.is_empty());
        for t in roots {
            let h = 1e-5 * (1.0 + t.abs());
            let slope = (canon.cost(t + h) - canon.cost(t - h)) / (2.0 * h);
            assert!(slope.abs() < 1e-6 * (1.0 + canon.cost(t)), "t={t} slope={slope}");
        }
    }
}
