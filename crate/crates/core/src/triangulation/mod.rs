//! Triangulation of scene points from calibrated views.
//!
//! Three methods are provided:
//!
//! * [`triangulate_linear`]: homogeneous DLT over any number of views.
//! * [`triangulate_two_view_optimal`]: moves the two observations onto a
//!   pair of corresponding epipolar lines with the smallest total squared
//!   displacement (the degree-6 polynomial correction in [`hs_correct_pair`])
//!   and intersects the corrected rays exactly.
//! * [`triangulate_nview_lm`]: Levenberg–Marquardt refinement of the summed
//!   squared reprojection error, started from the linear solution.
//!
//! All three report [`geometric_error`] against the original observations so
//! their results are directly comparable.

mod linear;
mod nview;
mod two_view;

pub use linear::triangulate_linear;
pub use nview::{
    triangulate_nview_lm, triangulate_nview_lm_with, ray_midpoint, ReprojectionProblem,
};
pub use two_view::{
    hs_correct_pair, triangulate_two_view_optimal, triangulate_two_view_optimal_with_f,
    CorrectedPair,
};

use std::fmt;
use std::str::FromStr;

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{HomoPoint3, ProjectionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Method {
    #[serde(rename = "linear")]
    Linear,
    #[serde(rename = "two-opt")]
    TwoViewOptimal,
    #[serde(rename = "nview-lm")]
    NViewLm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Linear, Method::TwoViewOptimal, Method::NViewLm];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Linear => "linear",
            Method::TwoViewOptimal => "two-opt",
            Method::NViewLm => "nview-lm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Method::Linear),
            "two-opt" => Ok(Method::TwoViewOptimal),
            "nview-lm" => Ok(Method::NViewLm),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected linear, two-opt or nview-lm)"
            ))),
        }
    }
}

/// One pixel observation of a scene point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub view: usize,
    pub pixel: Vector2<f64>,
}

/// Observations of a single scene point across a subset of views.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub point_id: u64,
    observations: Vec<Observation>,
}

impl Track {
    /// View indices must be strictly increasing.
    pub fn new(point_id: u64, observations: Vec<Observation>) -> Result<Self> {
        if observations.windows(2).any(|w| w[0].view >= w[1].view) {
            return Err(Error::Domain(format!(
                "track {point_id}: view indices must be strictly increasing"
            )));
        }
        if observations.iter().any(|o| !o.pixel.iter().all(|v| v.is_finite())) {
            return Err(Error::Domain(format!("track {point_id}: non-finite pixel")));
        }
        Ok(Track {
            point_id,
            observations,
        })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Sub-track with the observations at positions `i < j`.
    pub fn pair(&self, i: usize, j: usize) -> Track {
        Track {
            point_id: self.point_id,
            observations: vec![self.observations[i], self.observations[j]],
        }
    }

    pub(crate) fn check(&self, view_count: usize) -> Result<()> {
        if self.observations.len() < 2 {
            return Err(Error::InsufficientObservations {
                found: self.observations.len(),
            });
        }
        for o in &self.observations {
            if o.view >= view_count {
                return Err(Error::InvalidViewIndex {
                    index: o.view,
                    count: view_count,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangulationResult {
    /// Dehomogenized (`w = 1`).
    pub point: HomoPoint3,
    pub method: Method,
    /// Pixel distance between each observation and its reprojection.
    pub per_view_residual: Vec<f64>,
    /// Sum of squared pixel residuals.
    pub geometric_error: f64,
    pub converged: bool,
}

impl TriangulationResult {
    pub fn position(&self) -> Vector3<f64> {
        self.point.0.xyz()
    }

    pub(crate) fn evaluate(
        views: &[ProjectionMatrix],
        track: &Track,
        point: Vector3<f64>,
        method: Method,
        converged: bool,
    ) -> Result<Self> {
        let point = HomoPoint3::from_euclidean(&point);
        let per_view_residual = reprojection_residuals(views, &point, track)?;
        let geometric_error = per_view_residual.iter().map(|r| r * r).sum();
        Ok(TriangulationResult {
            point,
            method,
            per_view_residual,
            geometric_error,
            converged,
        })
    }
}

/// Pixel distance between each observation and the reprojected point.
pub fn reprojection_residuals(
    views: &[ProjectionMatrix],
    point: &HomoPoint3,
    track: &Track,
) -> Result<Vec<f64>> {
    if !point.is_finite_point() {
        return Err(Error::PointAtInfinity);
    }
    track
        .observations()
        .iter()
        .map(|o| {
            let p = views.get(o.view).ok_or(Error::InvalidViewIndex {
                index: o.view,
                count: views.len(),
            })?;
            Ok((p.project_pixel(point)? - o.pixel).norm())
        })
        .collect()
}

/// Sum over the track of squared pixel distances between observations and
/// reprojections of `point`.
pub fn geometric_error(
    views: &[ProjectionMatrix],
    point: &HomoPoint3,
    track: &Track,
) -> Result<f64> {
    Ok(reprojection_residuals(views, point, track)?
        .iter()
        .map(|r| r * r)
        .sum())
}

/// Conjectured degree of the optimal n-view triangulation polynomial,
/// `9/2 n^3 - 21/2 n^2 + 8 n - 4`.
pub fn degree_conjecture(n: u32) -> Result<u64> {
    if n < 2 {
        return Err(Error::Domain(format!("degree conjecture needs n >= 2, got {n}")));
    }
    let n = n as i128;
    let twice = 9 * n * n * n - 21 * n * n + 16 * n - 8;
    u64::try_from(twice / 2).map_err(|_| Error::Domain("degree overflows u64".into()))
}
