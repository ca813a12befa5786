use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::mean_std;
use crate::error::{Error, Result};
use crate::triangulation::Method;

/// Column order of the aggregate CSV.
pub const CSV_HEADER: [&str; 10] = [
    "config_id",
    "method",
    "trials",
    "points_mean",
    "points_std",
    "dispersion_mean",
    "dispersion_std",
    "reproj_mean",
    "disagreement_mean",
    "runtime_ms_mean",
];

/// Column order of the per-trial CSV.
pub const TRIALS_HEADER: [&str; 11] = [
    "config_id",
    "trial",
    "seed",
    "method",
    "tracks",
    "points",
    "failures",
    "dispersion",
    "reproj",
    "disagreement",
    "runtime_ms",
];

/// Metrics of one method in one trial. Optional metrics are absent when no
/// point was reconstructed or the metric does not apply to the method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub config_id: String,
    pub trial: u32,
    pub seed: u64,
    pub method: Method,
    /// Tracks in the scene.
    pub tracks: usize,
    /// Successful triangulations; a track counts once per view pair.
    pub points: usize,
    pub failures: usize,
    /// RMS distance to ground truth, cm.
    pub dispersion: Option<f64>,
    /// Mean per-point RMS reprojection error, pixels.
    pub reproj: Option<f64>,
    /// RMS over tracks of the mean distance between pair reconstructions, cm.
    pub disagreement: Option<f64>,
    pub runtime_ms: f64,
}

/// A method's metrics aggregated over trials. Standard deviations are
/// sample deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub points_mean: f64,
    pub points_std: f64,
    pub failures_mean: f64,
    pub dispersion_mean: Option<f64>,
    pub dispersion_std: Option<f64>,
    pub reproj_mean: Option<f64>,
    pub disagreement_mean: Option<f64>,
    pub runtime_ms_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_id: String,
    pub trials: u32,
    pub methods: Vec<MethodSummary>,
    /// Mean two-view point count over mean three-view point count. The
    /// two-view side is the optimal method when run, else the linear one.
    pub count_ratio: Option<f64>,
    /// `100 (d2 - d3) / d2` for mean two-view and three-view dispersions;
    /// positive when the three-view method is tighter.
    pub dispersion_delta_pct: Option<f64>,
    pub trial_rows: Vec<TrialMetrics>,
}

impl ExperimentReport {
    /// Aggregates per-trial rows; the summary is a pure function of them.
    pub fn from_trials(config: &ExperimentConfig, rows: Vec<TrialMetrics>) -> Self {
        let methods: Vec<MethodSummary> = config
            .methods
            .iter()
            .map(|&m| summarize(m, rows.iter().filter(|r| r.method == m)))
            .collect();
        let find = |m: Method| methods.iter().find(|s| s.method == m);
        let two = find(Method::TwoViewOptimal).or_else(|| find(Method::Linear));
        let three = find(Method::NViewLm);
        let (count_ratio, dispersion_delta_pct) = match (two, three) {
            (Some(two), Some(three)) => (
                (three.points_mean > 0.0).then(|| two.points_mean / three.points_mean),
                match (two.dispersion_mean, three.dispersion_mean) {
                    (Some(d2), Some(d3)) if d2 > 0.0 => Some(100.0 * (d2 - d3) / d2),
                    _ => None,
                },
            ),
            _ => (None, None),
        };
        ExperimentReport {
            config_id: config.id.clone(),
            trials: config.trials,
            methods,
            count_ratio,
            dispersion_delta_pct,
            trial_rows: rows,
        }
    }

    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }
}

fn summarize<'a>(method: Method, rows: impl Iterator<Item = &'a TrialMetrics>) -> MethodSummary {
    let rows: Vec<_> = rows.collect();
    let collect = |f: fn(&TrialMetrics) -> Option<f64>| rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>();
    let points = collect(|r| Some(r.points as f64));
    let (points_mean, points_std) = mean_std(&points).unwrap_or((0.0, 0.0));
    let dispersion = mean_std(&collect(|r| r.dispersion));
    MethodSummary {
        method,
        points_mean,
        points_std,
        failures_mean: mean_std(&collect(|r| Some(r.failures as f64))).map_or(0.0, |m| m.0),
        dispersion_mean: dispersion.map(|d| d.0),
        dispersion_std: dispersion.map(|d| d.1),
        reproj_mean: mean_std(&collect(|r| r.reproj)).map(|m| m.0),
        disagreement_mean: mean_std(&collect(|r| r.disagreement)).map(|m| m.0),
        runtime_ms_mean: mean_std(&collect(|r| Some(r.runtime_ms))).map_or(0.0, |m| m.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

impl ReportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

/// Per-trial companion of an aggregate report: `run.csv` -> `run.trials.csv`.
pub fn trials_path(path: &Path) -> PathBuf {
    path.with_extension("trials.csv")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Domain(format!("csv output failed: {other:?}")),
    }
}

/// Aggregate CSV: one row per (config, method), in report and method order.
pub fn write_csv<W: Write>(reports: &[ExperimentReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in reports {
        for s in &r.methods {
            w.write_record([
                r.config_id.clone(),
                s.method.to_string(),
                r.trials.to_string(),
                s.points_mean.to_string(),
                s.points_std.to_string(),
                opt(s.dispersion_mean),
                opt(s.dispersion_std),
                opt(s.reproj_mean),
                opt(s.disagreement_mean),
                s.runtime_ms_mean.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials_csv<W: Write>(reports: &[ExperimentReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_HEADER)?;
    for t in reports.iter().flat_map(|r| &r.trial_rows) {
        w.write_record([
            t.config_id.clone(),
            t.trial.to_string(),
            t.seed.to_string(),
            t.method.to_string(),
            t.tracks.to_string(),
            t.points.to_string(),
            t.failures.to_string(),
            opt(t.dispersion),
            opt(t.reproj),
            opt(t.disagreement),
            t.runtime_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the aggregate report to `path` and the per-trial rows next to it
/// (see [`trials_path`]).
pub fn write_report(reports: &[ExperimentReport], path: &Path, format: ReportFormat) -> Result<()> {
    let create = |p: &Path| File::create(p).map_err(|e| Error::io(p, e));
    match format {
        ReportFormat::Csv => write_csv(reports, create(path)?).map_err(|e| csv_err(path, e))?,
        ReportFormat::Json => {
            let mut f = create(path)?;
            serde_json::to_writer_pretty(&mut f, reports)
                .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
            f.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
    }
    let trials = trials_path(path);
    write_trials_csv(reports, create(&trials)?).map_err(|e| csv_err(&trials, e))
}

pub fn read_json_report(path: &Path) -> Result<Vec<ExperimentReport>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: format!("report line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}
