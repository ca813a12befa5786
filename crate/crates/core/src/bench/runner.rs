use std::collections::HashMap;
use std::time::Instant;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use super::config::{validate_all, ExperimentConfig, TwoViewPolicy};
use super::metrics::{dispersion, pairwise_disagreement};
use super::report::{ExperimentReport, TrialMetrics};
use crate::error::{Error, Result};
use crate::geometry::{fundamental_from_projections, HomoPoint2, ProjectionMatrix};
use crate::scene::{NoiseModel, ObjectModel, SyntheticScene};
use crate::triangulation::{
    triangulate_linear, triangulate_nview_lm, triangulate_two_view_optimal_with_f, Method, Track,
    TriangulationResult,
};

/// Runner switches that do not change what is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record wall-clock time per method. Off by default so that reports
    /// are byte-identical across runs; `runtime_ms` is then 0.
    pub timing: bool,
}

/// Seed of trial `t`.
pub fn trial_seed(config: &ExperimentConfig, trial: u32) -> u64 {
    config.base_seed.wrapping_add(trial as u64)
}

/// Scene of trial `t`: the trial seed is added to both the object and the
/// noise seed.
pub fn trial_scene(config: &ExperimentConfig, trial: u32) -> Result<SyntheticScene> {
    let seed = trial_seed(config, trial);
    let object = ObjectModel {
        seed: config.object.seed.wrapping_add(seed),
        ..config.object.clone()
    };
    let noise = NoiseModel {
        seed: config.noise.seed.wrapping_add(seed),
        ..config.noise.clone()
    };
    SyntheticScene::generate(&object, &config.rig, &noise)
}

/// Observation-index pairs a two-view method triangulates for a track.
fn pairs(len: usize, policy: TwoViewPolicy) -> Vec<(usize, usize)> {
    match policy {
        TwoViewPolicy::FirstPair => vec![(0, 1)],
        TwoViewPolicy::AllPairs => (0..len)
            .flat_map(|i| (i + 1..len).map(move |j| (i, j)))
            .collect(),
    }
}

struct Outcome {
    positions: Vec<Vector3<f64>>,
    truths: Vec<Vector3<f64>>,
    rms_px: Vec<f64>,
    per_track: Vec<Vec<Vector3<f64>>>,
    failures: usize,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            positions: Vec::new(),
            truths: Vec::new(),
            rms_px: Vec::new(),
            per_track: Vec::new(),
            failures: 0,
        }
    }

    fn record(&mut self, result: Result<TriangulationResult>, truth: Vector3<f64>) -> Option<Vector3<f64>> {
        match result {
            Ok(r) => {
                let p = r.position();
                self.positions.push(p);
                self.truths.push(truth);
                self.rms_px.push((r.geometric_error / r.per_view_residual.len() as f64).sqrt());
                Some(p)
            }
            Err(_) => {
                self.failures += 1;
                None
            }
        }
    }
}

struct TrialContext<'a> {
    scene: &'a SyntheticScene,
    projections: Vec<ProjectionMatrix>,
    fundamentals: HashMap<(usize, usize), Result<Matrix3<f64>>>,
}

impl TrialContext<'_> {
    fn truth(&self, track: &Track) -> Vector3<f64> {
        self.scene.ground_truth[track.point_id as usize].0.xyz()
    }

    fn two_view(&self, method: Method, track: &Track, i: usize, j: usize) -> Result<TriangulationResult> {
        match method {
            Method::Linear => triangulate_linear(&self.projections, &track.pair(i, j)),
            Method::TwoViewOptimal => {
                let (a, b) = (track.observations()[i], track.observations()[j]);
                let f = self.fundamentals[&(a.view, b.view)]
                    .as_ref()
                    .map_err(|e| Error::Domain(e.to_string()))?;
                triangulate_two_view_optimal_with_f(
                    &self.projections[a.view],
                    &self.projections[b.view],
                    f,
                    &HomoPoint2::from_pixel(&a.pixel),
                    &HomoPoint2::from_pixel(&b.pixel),
                )
            }
            Method::NViewLm => unreachable!("n-view is not a pair method"),
        }
    }

    fn run(&self, method: Method, policy: TwoViewPolicy) -> Outcome {
        let mut out = Outcome::new();
        for track in &self.scene.tracks {
            let truth = self.truth(track);
            match method {
                Method::NViewLm => {
                    if track.len() == self.projections.len() {
                        out.record(triangulate_nview_lm(&self.projections, track), truth);
                    }
                }
                _ => {
                    let mut positions = Vec::new();
                    for (i, j) in pairs(track.len(), policy) {
                        if let Some(p) = out.record(self.two_view(method, track, i, j), truth) {
                            positions.push(p);
                        }
                    }
                    out.per_track.push(positions);
                }
            }
        }
        out
    }
}

/// Runs one trial of `config`, returning one row per method in config
/// order.
pub fn run_trial(config: &ExperimentConfig, trial: u32, options: RunOptions) -> Result<Vec<TrialMetrics>> {
    let scene = trial_scene(config, trial)?;
    let projections = scene.views.iter().map(|v| v.projection()).collect::<Result<Vec<_>>>()?;
    let mut fundamentals = HashMap::new();
    for a in 0..projections.len() {
        for b in a + 1..projections.len() {
            fundamentals.insert((a, b), fundamental_from_projections(&projections[a], &projections[b]));
        }
    }
    let ctx = TrialContext {
        scene: &scene,
        projections,
        fundamentals,
    };
    let seed = trial_seed(config, trial);
    Ok(config
        .methods
        .iter()
        .map(|&method| {
            let start = options.timing.then(Instant::now);
            let out = ctx.run(method, config.two_view_policy);
            let runtime_ms = start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3);
            let disagreement = match (method, config.two_view_policy) {
                (Method::NViewLm, _) | (_, TwoViewPolicy::FirstPair) => None,
                _ => pairwise_disagreement(&out.per_track).ok(),
            };
            TrialMetrics {
                config_id: config.id.clone(),
                trial,
                seed,
                method,
                tracks: scene.tracks.len(),
                points: out.positions.len(),
                failures: out.failures,
                dispersion: dispersion(&out.positions, &out.truths).ok(),
                reproj: (!out.rms_px.is_empty())
                    .then(|| out.rms_px.iter().sum::<f64>() / out.rms_px.len() as f64),
                disagreement,
                runtime_ms,
            }
        })
        .collect())
}

/// Runs every trial of `config` and aggregates the results.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    let rows = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_trials(config, rows.into_iter().flatten().collect()))
}

/// Runs `configs` on up to `parallelism` threads; reports come back in
/// input order.
pub fn run_sweep(configs: &[ExperimentConfig], parallelism: usize, options: RunOptions) -> Result<Vec<ExperimentReport>> {
    validate_all(configs)?;
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    pool.install(|| {
        configs
            .par_iter()
            .map(|c| run_experiment_with(c, options))
            .collect()
    })
}
