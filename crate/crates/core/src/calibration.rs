//! DLT calibration: recover `P` from 3D-2D correspondences by minimizing
//! the algebraic error `|A p|` with `|p| = 1`.

use std::path::Path;

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{HomoPoint2, HomoPoint3, ProjectionMatrix};
use crate::numeric::smallest_singular_vector;

pub const MIN_CORRESPONDENCES: usize = 6;
const COPLANAR_RELATIVE_VARIANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationCorrespondence {
    pub world: HomoPoint3,
    pub pixel: HomoPoint2,
}

impl CalibrationCorrespondence {
    pub fn new(world: Vector3<f64>, pixel: Vector2<f64>) -> Self {
        CalibrationCorrespondence {
            world: HomoPoint3::from_euclidean(&world),
            pixel: HomoPoint2::from_pixel(&pixel),
        }
    }

    fn finite(&self) -> Result<(Vector3<f64>, Vector2<f64>)> {
        match (self.world.to_euclidean(), self.pixel.to_pixel()) {
            (Some(w), Some(p)) => Ok((w, p)),
            _ => Err(Error::Domain("calibration correspondences must be finite".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    /// Unit Frobenius norm, largest-magnitude entry positive.
    pub projection: ProjectionMatrix,
    /// `|A p|` of the normalized system that was actually solved.
    pub algebraic_residual: f64,
    /// Pixels.
    pub rms_reprojection: f64,
}

/// The `2N x 12` DLT system. Row `2i` is `(X^T, 0, -u X^T)` and row
/// `2i+1` is `(0, X^T, -v X^T)` for `p = (P11, P12, ..., P34)`.
pub fn build_dlt_system(corrs: &[CalibrationCorrespondence]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(2 * corrs.len(), 12);
    for (i, c) in corrs.iter().enumerate() {
        let x = c.world.0;
        let (u, v) = (c.pixel.0[0] / c.pixel.0[2], c.pixel.0[1] / c.pixel.0[2]);
        for k in 0..4 {
            a[(2 * i, k)] = x[k];
            a[(2 * i, 8 + k)] = -u * x[k];
            a[(2 * i + 1, 4 + k)] = x[k];
            a[(2 * i + 1, 8 + k)] = -v * x[k];
        }
    }
    a
}

/// Similarity moving the centroid to the origin with mean distance `target`.
fn similarity<const D: usize>(points: &[nalgebra::SVector<f64, D>], target: f64) -> (nalgebra::SVector<f64, D>, f64) {
    let n = points.len() as f64;
    let centroid = points.iter().fold(nalgebra::SVector::<f64, D>::zeros(), |a, p| a + p) / n;
    let mean_dist = points.iter().map(|p| (p - centroid).norm()).sum::<f64>() / n;
    let scale = if mean_dist > 0.0 { target / mean_dist } else { 1.0 };
    (centroid, scale)
}

pub fn calibrate_dlt(corrs: &[CalibrationCorrespondence]) -> Result<CalibrationResult> {
    if corrs.len() < MIN_CORRESPONDENCES {
        return Err(Error::InsufficientPoints { found: corrs.len() });
    }
    let finite = corrs
        .iter()
        .map(|c| c.finite())
        .collect::<Result<Vec<_>>>()?;
    let world: Vec<Vector3<f64>> = finite.iter().map(|(w, _)| *w).collect();
    let pixels: Vec<Vector2<f64>> = finite.iter().map(|(_, p)| *p).collect();

    check_not_coplanar(&world)?;

    let (wc, ws) = similarity(&world, 3f64.sqrt());
    let (pc, ps) = similarity(&pixels, 2f64.sqrt());
    let normalized: Vec<CalibrationCorrespondence> = world
        .iter()
        .zip(&pixels)
        .map(|(w, p)| CalibrationCorrespondence::new((w - wc) * ws, (p - pc) * ps))
        .collect();

    let a = build_dlt_system(&normalized);
    let p_norm = smallest_singular_vector(&a);
    let algebraic_residual = (&a * &p_norm).norm();

    let pn = Matrix3x4::from_row_slice(p_norm.as_slice());
    let t_world = Matrix4::new(
        ws, 0.0, 0.0, -ws * wc.x, //
        0.0, ws, 0.0, -ws * wc.y, //
        0.0, 0.0, ws, -ws * wc.z, //
        0.0, 0.0, 0.0, 1.0,
    );
    let t_pixel_inv = Matrix3::new(
        1.0 / ps, 0.0, pc.x, //
        0.0, 1.0 / ps, pc.y, //
        0.0, 0.0, 1.0,
    );
    let p = t_pixel_inv * pn * t_world;
    let projection = ProjectionMatrix(normalize_unit(p));
    let rms_reprojection = rms_reprojection(&projection, corrs)?;
    Ok(CalibrationResult {
        projection,
        algebraic_residual,
        rms_reprojection,
    })
}

/// Scales to unit Frobenius norm with the largest-magnitude entry positive.
pub(crate) fn normalize_unit(p: Matrix3x4<f64>) -> Matrix3x4<f64> {
    let p = p / p.norm();
    if p[p.iamax_full()] < 0.0 {
        -p
    } else {
        p
    }
}

fn check_not_coplanar(world: &[Vector3<f64>]) -> Result<()> {
    let n = world.len();
    let centroid = world.iter().fold(Vector3::zeros(), |a, p| a + p) / n as f64;
    let centered = DMatrix::from_fn(n, 3, |i, j| world[i][j] - centroid[j]);
    let sv = centered.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let ratio = if smax > 0.0 { (smin * smin) / (smax * smax) } else { 0.0 };
    if ratio <= COPLANAR_RELATIVE_VARIANCE {
        return Err(Error::DegenerateGeometry { ratio });
    }
    Ok(())
}

/// Root-mean-square pixel distance between observed and projected points.
pub fn rms_reprojection(p: &ProjectionMatrix, corrs: &[CalibrationCorrespondence]) -> Result<f64> {
    if corrs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    for c in corrs {
        let projected = p.project_pixel(&c.world)?;
        let observed = c
            .pixel
            .to_pixel()
            .ok_or_else(|| Error::Domain("pixel at infinity".into()))?;
        sum += (projected - observed).norm_squared();
    }
    Ok((sum / corrs.len() as f64).sqrt())
}

/// Parses `X Y Z u v` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_correspondences(text: &str) -> Result<Vec<CalibrationCorrespondence>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| tok.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::Parse {
                context: format!("line {}", lineno + 1),
                message: e.to_string(),
            })?;
        if values.len() != 5 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                context: format!("line {}", lineno + 1),
                message: format!("expected 5 finite numbers `X Y Z u v`, got {}", values.len()),
            });
        }
        out.push(CalibrationCorrespondence::new(
            Vector3::new(values[0], values[1], values[2]),
            Vector2::new(values[3], values[4]),
        ));
    }
    Ok(out)
}

pub fn read_correspondences(path: &Path) -> Result<Vec<CalibrationCorrespondence>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_correspondences(&text).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })
}
