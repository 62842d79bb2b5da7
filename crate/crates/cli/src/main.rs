//! `mapforge`: synthetic map-change data generation and evaluation.

mod commands;
mod config;
mod oracle;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mapforge::eval::EvalMode;
use mapforge::perturb::ChangeType;

#[derive(Parser, Debug)]
#[command(name = "mapforge", version, about = "Synthetic HD-map change data and change-detection evaluation")]
pub struct Cli {
    /// Root seed; every random stream of the run is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Print reports as JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a procedural road scene and write it to a directory.
    SynthScene(SynthSceneArgs),
    /// Apply one synthetic change to a map.
    Perturb(PerturbArgs),
    /// Rasterize a map as a bird's-eye view or from an ego-view camera.
    Render(RenderArgs),
    /// Generate (map, sensor, label) triplets from a scene directory.
    GenTriplets(GenTripletsArgs),
    /// Score change-detection predictions (mean of per-class accuracies).
    Eval(EvalArgs),
    /// Tile-based change-frequency report from visit counts.
    Freq(FreqArgs),
    /// Re-run a command from its run_config.json.
    Rerun {
        /// run_config.json or the directory holding it.
        config: PathBuf,
    },
    /// Reference computations used to regenerate test expectations.
    #[command(hide = true, subcommand)]
    Oracle(oracle::OracleCommand),
}

#[derive(Args, Debug, serde::Serialize)]
pub struct SynthSceneArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Trajectory length, meters.
    #[arg(long, default_value_t = 50.0)]
    pub length: f64,
    #[arg(long, default_value_t = 2)]
    pub lanes_forward: usize,
    #[arg(long, default_value_t = 1)]
    pub lanes_backward: usize,
    #[arg(long, default_value_t = 3.5)]
    pub lane_width: f64,
    /// Radius of a left-turning road; straight when omitted.
    #[arg(long)]
    pub curve_radius: Option<f64>,
    /// Ground rise over run along x.
    #[arg(long, default_value_t = 0.0)]
    pub slope: f64,
    /// Crosswalk positions along the road, meters (repeatable).
    #[arg(long = "crosswalk", default_values_t = [30.0])]
    pub crosswalks: Vec<f64>,
    /// Build the road without crosswalks.
    #[arg(long, conflicts_with = "crosswalks")]
    pub no_crosswalks: bool,
    /// Junction position along the road, meters.
    #[arg(long, default_value_t = 30.0)]
    pub intersection_at: f64,
    /// Build the road without a junction.
    #[arg(long)]
    pub no_intersection: bool,
    /// Camera image size as WIDTHxHEIGHT.
    #[arg(long, default_value = "64x48", value_parser = parse_size)]
    pub image_size: (usize, usize),
    /// Camera focal length, pixels.
    #[arg(long, default_value_t = 32.0)]
    pub focal: f64,
    /// Number of cameras in the ring.
    #[arg(long, default_value_t = 7)]
    pub cameras: usize,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct PerturbArgs {
    /// Input map.json.
    #[arg(long)]
    pub map: PathBuf,
    /// Change type, e.g. insert-crosswalk or CHANGE_MARKING_COLOR.
    #[arg(long = "type", value_parser = parse_change_type)]
    pub change_type: ChangeType,
    /// Ego pose x,y[,yaw] the change must be visible from.
    #[arg(long, value_parser = parse_pose2, allow_hyphen_values = true)]
    pub ego: [f64; 3],
    /// Output directory for the perturbed map and its record.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, serde::Serialize)]
#[command(group(clap::ArgGroup::new("view").required(true).args(["bev", "ego"])))]
pub struct RenderArgs {
    /// Top-down render centered on the pose.
    #[arg(long)]
    pub bev: bool,
    /// Forward camera render from the pose.
    #[arg(long)]
    pub ego: bool,
    #[arg(long)]
    pub map: PathBuf,
    /// Ego pose x,y[,yaw]; height comes from the ground grid.
    #[arg(long, value_parser = parse_pose2, allow_hyphen_values = true)]
    pub pose: [f64; 3],
    /// Output image (.ppm, or .png when built with the png feature).
    #[arg(long)]
    pub out: PathBuf,
    /// BEV side length, pixels.
    #[arg(long, default_value_t = mapforge::render::BEV_SIZE)]
    pub size: usize,
    /// BEV meters per pixel.
    #[arg(long, default_value_t = mapforge::render::BEV_RESOLUTION)]
    pub resolution: f64,
    /// Ego-view image size as WIDTHxHEIGHT.
    #[arg(long, default_value = "1550x2048", value_parser = parse_size)]
    pub image_size: (usize, usize),
    /// Ego-view focal length, pixels.
    #[arg(long, default_value_t = 1000.0)]
    pub focal: f64,
    #[arg(long, default_value_t = 1.6)]
    pub camera_height: f64,
    /// Downward camera tilt, radians.
    #[arg(long, default_value_t = 0.05)]
    pub pitch: f64,
    /// Sparse depth samples as CSV u,v,depth (header required). Without
    /// it nothing is occluded.
    #[arg(long)]
    pub depth: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct GenTripletsArgs {
    /// Scene directory written by synth-scene.
    #[arg(long)]
    pub scene: PathBuf,
    /// Output directory; triplets go under OUT/<log id>/.
    #[arg(long)]
    pub out: PathBuf,
    /// Maximum negatives per frame, at most one per change type.
    #[arg(long, default_value_t = 3)]
    pub negatives: usize,
    /// Change types to draw from (repeatable; default all).
    #[arg(long = "type", value_parser = parse_change_type)]
    pub types: Vec<ChangeType>,
    #[arg(long, default_value_t = 400)]
    pub size: usize,
    #[arg(long, default_value_t = 0.1)]
    pub resolution: f64,
    /// Camera pixel stride for ray casting.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct EvalArgs {
    /// CSV with log_id,timestamp_ns,mode,label,prediction.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Keep only rows of this mode; with --annotations, also the labeling rule.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<EvalMode>,
    /// Perturbation record files; labels are recomputed from them.
    #[arg(long, num_args = 1.., requires = "poses")]
    pub annotations: Vec<PathBuf>,
    /// Pose history (JSON lines) matched to prediction timestamps.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// Labeling range, meters.
    #[arg(long, default_value_t = mapforge::eval::DEFAULT_RANGE)]
    pub range: f64,
    /// Also write the report (and run config) to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, serde::Serialize)]
pub struct FreqArgs {
    /// CSV with tile_ix,tile_iy,visits,changed.
    #[arg(long)]
    pub visits: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub min_visits: u32,
    /// Also write the report (and run config) to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_change_type(s: &str) -> Result<ChangeType, String> {
    s.parse().map_err(|e: mapforge::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<EvalMode, String> {
    s.parse().map_err(|e: mapforge::Error| e.to_string())
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let w = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
    let h = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
    Ok((w, h))
}

fn parse_pose2(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y] => Ok([x, y, 0.0]),
        [x, y, yaw] => Ok([x, y, yaw]),
        _ => Err(format!("expected x,y or x,y,yaw, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse_from(&argv);
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
