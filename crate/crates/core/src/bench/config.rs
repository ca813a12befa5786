use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{
    NoiseModel, ObjectModel, Resolution, RigKind, RigSpec, DISTANCE_STATIONS_CM,
};
use crate::triangulation::Method;

/// Left-camera angles of the angle study, degrees.
pub const ANGLE_LEFT_DEG: [f64; 3] = [5.33, 9.46, 10.72];
/// Right-camera angles of the angle study, degrees.
pub const ANGLE_RIGHT_DEG: [f64; 3] = [8.74, 13.18, 16.79];
pub const DEFAULT_TRIALS: u32 = 30;

/// Which observation pairs the two-view methods triangulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoViewPolicy {
    /// Every pair of observations of every track.
    #[default]
    AllPairs,
    /// Only the first two observations of each track.
    FirstPair,
}

/// Built-in parameter grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// 3x3 grid of left and right camera angles.
    Angles,
    /// All three-station placements out of the seven distance stations.
    Distances,
    /// The four resolution presets.
    Resolutions,
}

impl std::str::FromStr for Sweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angles" => Ok(Sweep::Angles),
            "distances" => Ok(Sweep::Distances),
            "resolutions" => Ok(Sweep::Resolutions),
            other => Err(Error::Config(format!(
                "unknown sweep `{other}` (expected angles, distances or resolutions)"
            ))),
        }
    }
}

/// One fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default)]
    pub object: ObjectModel,
    #[serde(default)]
    pub rig: RigSpec,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub two_view_policy: TwoViewPolicy,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub base_seed: u64,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_trials() -> u32 {
    DEFAULT_TRIALS
}

impl ExperimentConfig {
    /// A config with every field at its default.
    pub fn with_id(id: impl Into<String>) -> Self {
        ExperimentConfig {
            id: id.into(),
            object: ObjectModel::default(),
            rig: RigSpec::default(),
            noise: NoiseModel::default(),
            methods: all_methods(),
            two_view_policy: TwoViewPolicy::default(),
            trials: DEFAULT_TRIALS,
            base_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(format!("experiment `{}`: {msg}", self.id)));
        if self.id.is_empty() {
            return Err(Error::Validation("experiment id must be non-empty".into()));
        }
        if self.methods.is_empty() {
            return fail("methods must be non-empty".into());
        }
        let unique: HashSet<_> = self.methods.iter().collect();
        if unique.len() != self.methods.len() {
            return fail("methods must not repeat".into());
        }
        if self.trials < 1 {
            return fail("trials must be >= 1".into());
        }
        let wrap = |e: Error| Error::Validation(format!("experiment `{}`: {e}", self.id));
        self.noise.validate().map_err(wrap)?;
        self.object.validate().map_err(wrap)?;
        self.rig.validate().map_err(wrap)?;
        Ok(())
    }

    /// Expands `sweep` over this config, deriving ids as `<id>/<point>`.
    pub fn expand(&self, sweep: Sweep) -> Vec<ExperimentConfig> {
        match sweep {
            Sweep::Angles => ANGLE_LEFT_DEG
                .iter()
                .flat_map(|&l| ANGLE_RIGHT_DEG.iter().map(move |&r| (l, r)))
                .map(|(l, r)| ExperimentConfig {
                    id: format!("{}/L{l}-R{r}", self.id),
                    rig: RigSpec {
                        kind: RigKind::Angle,
                        left_angle_deg: l,
                        right_angle_deg: r,
                        ..self.rig.clone()
                    },
                    ..self.clone()
                })
                .collect(),
            Sweep::Distances => {
                let s = DISTANCE_STATIONS_CM;
                let mut out = Vec::new();
                for i in 0..s.len() {
                    for j in i + 1..s.len() {
                        for k in j + 1..s.len() {
                            out.push(ExperimentConfig {
                                id: format!("{}/D{}-{}-{}", self.id, s[i], s[j], s[k]),
                                rig: RigSpec {
                                    kind: RigKind::Distance,
                                    camera_offsets_cm: [s[i], s[j], s[k]],
                                    ..self.rig.clone()
                                },
                                ..self.clone()
                            });
                        }
                    }
                }
                out
            }
            Sweep::Resolutions => Resolution::PRESETS
                .iter()
                .map(|(name, r)| ExperimentConfig {
                    id: format!("{}/{name}", self.id),
                    rig: RigSpec {
                        resolution: *r,
                        focal_pixels: None,
                        ..self.rig.clone()
                    },
                    ..self.clone()
                })
                .collect(),
        }
    }
}

struct ConfigEntry {
    sweep: Option<Sweep>,
    experiment: ExperimentConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    experiments: Vec<serde_json::Value>,
}

/// Parses an experiment file: `{"experiments": [ ... ]}`. Each entry is an
/// [`ExperimentConfig`] plus an optional `"sweep"` that expands it into a
/// grid. Omitted fields take their defaults.
pub fn parse_config_str(text: &str) -> Result<Vec<ExperimentConfig>> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("config line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut configs = Vec::new();
    for (i, value) in file.experiments.into_iter().enumerate() {
        let entry = parse_entry(value).map_err(|e| Error::Parse {
            context: format!("experiments[{i}]"),
            message: e.to_string(),
        })?;
        match entry.sweep {
            Some(s) => configs.extend(entry.experiment.expand(s)),
            None => configs.push(entry.experiment),
        }
    }
    validate_all(&configs)?;
    Ok(configs)
}

/// Splits off the `sweep` key so the rest parses strictly as an
/// [`ExperimentConfig`].
fn parse_entry(mut value: serde_json::Value) -> std::result::Result<ConfigEntry, serde_json::Error> {
    let sweep = match value.as_object_mut().and_then(|m| m.remove("sweep")) {
        Some(s) => Some(serde_json::from_value(s)?),
        None => None,
    };
    Ok(ConfigEntry {
        sweep,
        experiment: serde_json::from_value(value)?,
    })
}

pub fn parse_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Validates every config and checks ids are unique.
pub fn validate_all(configs: &[ExperimentConfig]) -> Result<()> {
    let mut seen = HashSet::new();
    for c in configs {
        c.validate()?;
        if !seen.insert(c.id.as_str()) {
            return Err(Error::Validation(format!("experiment id `{}` is not unique", c.id)));
        }
    }
    Ok(())
}

/// Replaces every `base_seed`.
pub fn override_seed(configs: &mut [ExperimentConfig], seed: u64) {
    for c in configs {
        c.base_seed = seed;
    }
}

/// The built-in sweeps used by the `sweep` command.
///
/// The angle and distance sweeps run at `ultrahd`; the resolution sweep
/// uses the default angle rig with quantization on, so the ladder changes
/// only the sampling of the image plane.
pub fn builtin_sweep(sweep: Sweep) -> Vec<ExperimentConfig> {
    let mut base = ExperimentConfig::with_id(match sweep {
        Sweep::Angles => "angles",
        Sweep::Distances => "distances",
        Sweep::Resolutions => "resolutions",
    });
    if sweep == Sweep::Resolutions {
        base.noise.quantize = true;
    }
    base.expand(sweep)
}
