use std::fs;
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::SyntheticScene;
use crate::error::{Error, Result};
use crate::geometry::ProjectionMatrix;
use crate::triangulation::{Observation, Track};

/// One camera: its projection matrix in row-major order and image size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewRecord {
    #[serde(rename = "P")]
    pub p: [f64; 12],
    pub width: u32,
    pub height: u32,
}

/// Observations of one point as `[view_index, u, v]` triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackRecord {
    pub point_id: u64,
    pub observations: Vec<(usize, f64, f64)>,
}

/// On-disk scene document. Also the ingestion format for externally
/// measured data, where `ground_truth` and `provenance` may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub views: Vec<ViewRecord>,
    #[serde(default)]
    pub ground_truth: Vec<[f64; 3]>,
    pub tracks: Vec<TrackRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl SceneFile {
    pub fn from_scene(scene: &SyntheticScene) -> Result<Self> {
        let views = scene
            .views
            .iter()
            .map(|v| {
                Ok(ViewRecord {
                    p: v.projection()?.to_row_major(),
                    width: v.image_width,
                    height: v.image_height,
                })
            })
            .collect::<Result<_>>()?;
        let ground_truth = scene
            .ground_truth
            .iter()
            .map(|p| {
                let e = p.to_euclidean().ok_or(Error::PointAtInfinity)?;
                Ok([e.x, e.y, e.z])
            })
            .collect::<Result<_>>()?;
        let tracks = scene
            .tracks
            .iter()
            .map(|t| TrackRecord {
                point_id: t.point_id,
                observations: t.observations().iter().map(|o| (o.view, o.pixel.x, o.pixel.y)).collect(),
            })
            .collect();
        let provenance = serde_json::to_value(&scene.provenance)
            .map_err(|e| Error::Domain(format!("cannot serialize provenance: {e}")))?;
        Ok(SceneFile {
            views,
            ground_truth,
            tracks,
            provenance: Some(provenance),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("scene line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene documents contain only finite numbers")
    }

    fn validate(&self) -> Result<()> {
        if self.views.is_empty() {
            return Err(Error::Validation("scene has no views".into()));
        }
        if self.views.iter().any(|v| !v.p.iter().all(|x| x.is_finite())) {
            return Err(Error::Validation("projection matrices must be finite".into()));
        }
        self.tracks()?;
        Ok(())
    }

    pub fn projections(&self) -> Vec<ProjectionMatrix> {
        self.views.iter().map(|v| ProjectionMatrix::from_row_major(&v.p)).collect()
    }

    /// Tracks with view indices checked against the view list.
    pub fn tracks(&self) -> Result<Vec<Track>> {
        self.tracks
            .iter()
            .map(|t| {
                if let Some(&(view, _, _)) = t.observations.iter().find(|o| o.0 >= self.views.len()) {
                    return Err(Error::Validation(format!(
                        "track {}: view index {view} out of range ({} views)",
                        t.point_id,
                        self.views.len()
                    )));
                }
                let obs = t
                    .observations
                    .iter()
                    .map(|&(view, u, v)| Observation {
                        view,
                        pixel: Vector2::new(u, v),
                    })
                    .collect();
                Track::new(t.point_id, obs).map_err(|e| Error::Validation(e.to_string()))
            })
            .collect()
    }

    /// Ground-truth position of a track's point, when known.
    pub fn ground_truth_of(&self, point_id: u64) -> Option<Vector3<f64>> {
        self.ground_truth.get(point_id as usize).map(|p| Vector3::from(*p))
    }
}

pub fn read_scene(path: &Path) -> Result<SceneFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SceneFile::parse(&text)
}

pub fn write_scene(path: &Path, scene: &SceneFile) -> Result<()> {
    let mut text = scene.to_json();
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
