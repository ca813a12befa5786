//! Command-line front end: scene simulation, DLT calibration,
//! triangulation of scene files and the benchmark sweeps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mvtri::bench::{
    builtin_sweep, override_seed, parse_config, run_sweep, trial_scene, write_report,
    ExperimentConfig, ReportFormat, RunOptions, Sweep,
};
use mvtri::calibration::{calibrate_dlt, read_correspondences};
use mvtri::scene::{read_scene, write_scene, SceneFile};
use mvtri::triangulation::{
    triangulate_linear, triangulate_nview_lm, triangulate_two_view_optimal, Track,
};
use mvtri::{Error, HomoPoint2, Method, ProjectionMatrix, Result, TriangulationResult};

const SEED_VAR: &str = "MVTRI_SEED";

#[derive(Parser)]
#[command(name = "mvtri", version, about = "Multi-view triangulation toolkit and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one synthetic scene from an experiment config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Experiment id to simulate; defaults to the first.
        #[arg(long)]
        experiment: Option<String>,
        #[arg(long, default_value_t = 0)]
        trial: u32,
    },
    /// Estimate a projection matrix from `X Y Z u v` correspondences.
    Calibrate {
        #[arg(long)]
        corr: PathBuf,
    },
    /// Triangulate every track of a scene file.
    Triangulate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the experiments of a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output path without extension.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run a built-in sweep.
    Sweep {
        #[arg(long)]
        preset: Sweep,
        /// Output path without extension.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<u32>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, default_value_t = default_parallelism())]
    parallel: usize,
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Record wall-clock runtimes (makes the output run-dependent).
    #[arg(long)]
    timing: bool,
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn seed_override() -> Result<Option<u64>> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_VAR} must be an unsigned 64-bit integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

fn apply_seed(configs: &mut [ExperimentConfig]) -> Result<()> {
    if let Some(seed) = seed_override()? {
        override_seed(configs, seed);
    }
    Ok(())
}

fn with_extension(prefix: &Path, format: ReportFormat) -> PathBuf {
    let ext = format.extension();
    if prefix.extension().is_some_and(|e| e == ext) {
        prefix.to_path_buf()
    } else {
        let mut s = prefix.as_os_str().to_owned();
        s.push(".");
        s.push(ext);
        PathBuf::from(s)
    }
}

fn bench(mut configs: Vec<ExperimentConfig>, out: &Path, run: &RunArgs) -> Result<()> {
    apply_seed(&mut configs)?;
    let reports = run_sweep(&configs, run.parallel, RunOptions { timing: run.timing })?;
    let path = with_extension(out, run.format);
    write_report(&reports, &path, run.format)?;
    eprintln!("wrote {} ({} experiments)", path.display(), reports.len());
    Ok(())
}

fn simulate(config: &Path, out: &Path, experiment: Option<&str>, trial: u32) -> Result<()> {
    let mut configs = parse_config(config)?;
    apply_seed(&mut configs)?;
    let chosen = match experiment {
        Some(id) => configs
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::Config(format!("no experiment with id `{id}`")))?,
        None => configs
            .first()
            .ok_or_else(|| Error::Config("config lists no experiments".into()))?,
    };
    let scene = trial_scene(chosen, trial)?;
    write_scene(out, &SceneFile::from_scene(&scene)?)?;
    eprintln!("wrote {} ({} points, {} tracks)", out.display(), scene.ground_truth.len(), scene.tracks.len());
    Ok(())
}

fn calibrate(corr: &Path) -> Result<()> {
    let corrs = read_correspondences(corr)?;
    let result = calibrate_dlt(&corrs)?;
    println!("P =");
    for r in 0..3 {
        let row = result.projection.row(r);
        println!("  {:>22.15e} {:>22.15e} {:>22.15e} {:>22.15e}", row[0], row[1], row[2], row[3]);
    }
    println!("rms_px = {}", result.rms_reprojection);
    println!("algebraic_residual = {:e}", result.algebraic_residual);
    Ok(())
}

fn triangulate_track(method: Method, views: &[ProjectionMatrix], track: &Track) -> Result<TriangulationResult> {
    match method {
        Method::Linear => triangulate_linear(views, track),
        Method::NViewLm => triangulate_nview_lm(views, track),
        Method::TwoViewOptimal => {
            if track.len() < 2 {
                return Err(Error::InsufficientObservations { found: track.len() });
            }
            let (a, b) = (track.observations()[0], track.observations()[1]);
            let get = |v: usize| {
                views.get(v).ok_or(Error::InvalidViewIndex {
                    index: v,
                    count: views.len(),
                })
            };
            triangulate_two_view_optimal(
                get(a.view)?,
                get(b.view)?,
                &HomoPoint2::from_pixel(&a.pixel),
                &HomoPoint2::from_pixel(&b.pixel),
            )
        }
    }
}

fn triangulate(scene: &Path, method: Method, out: &Path) -> Result<()> {
    let file = read_scene(scene)?;
    let views = file.projections();
    let tracks = file.tracks()?;
    let f = File::create(out).map_err(|e| io_err(out, e))?;
    let mut w = csv::Writer::from_writer(f);
    let csv_io = |e: csv::Error| Error::Io {
        path: out.to_path_buf(),
        source: std::io::Error::other(e),
    };
    w.write_record(["point_id", "method", "x", "y", "z", "geometric_error", "rms_px", "converged", "error"])
        .map_err(csv_io)?;
    let mut failures = 0usize;
    for t in &tracks {
        let record = match triangulate_track(method, &views, t) {
            Ok(r) => {
                let p = r.position();
                let rms = (r.geometric_error / r.per_view_residual.len() as f64).sqrt();
                [
                    t.point_id.to_string(),
                    method.to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                    p.z.to_string(),
                    r.geometric_error.to_string(),
                    rms.to_string(),
                    r.converged.to_string(),
                    String::new(),
                ]
            }
            Err(e) => {
                failures += 1;
                let mut row: [String; 9] = Default::default();
                row[0] = t.point_id.to_string();
                row[1] = method.to_string();
                row[8] = e.to_string();
                row
            }
        };
        w.write_record(&record).map_err(csv_io)?;
    }
    w.flush().map_err(|e| io_err(out, e))?;
    eprintln!(
        "triangulated {} of {} tracks with {method}",
        tracks.len() - failures,
        tracks.len()
    );
    if failures == tracks.len() && !tracks.is_empty() {
        return Err(Error::Domain("every track failed to triangulate".into()));
    }
    Ok(())
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            experiment,
            trial,
        } => simulate(&config, &out, experiment.as_deref(), trial),
        Command::Calibrate { corr } => calibrate(&corr),
        Command::Triangulate { scene, method, out } => triangulate(&scene, method, &out),
        Command::Bench { config, out, run } => bench(parse_config(&config)?, &out, &run),
        Command::Sweep {
            preset,
            out,
            trials,
            run,
        } => {
            let mut configs = builtin_sweep(preset);
            if let Some(n) = trials {
                configs.iter_mut().for_each(|c| c.trials = n);
            }
            bench(configs, &out, &run)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "mvtri: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
