use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Parser;
use mapforge::eval::{label_frame, metrics_report, read_predictions_csv, ConfusionMatrix2, Label};
use mapforge::freq::{frequency_report, read_visits_csv};
use mapforge::geometry::{Point2, Point3, SE3Pose};
use mapforge::map::{load_map, save_map, VectorMap};
use mapforge::ortho::read_pose_history;
use mapforge::perturb::{perturb, ChangeType, PerturbationRecord, VisibilityWindow};
use mapforge::pipeline::{generate_scene, generate_triplets, load_scene, save_scene, triplets_digest, write_triplets};
use mapforge::pipeline::{PipelineOptions, SceneParams, TripletLabel};
use mapforge::render::{
    interpolate_depth_map, render_map_bev, render_map_egoview, CameraModel, DepthMap, RasterImage, RenderStyle,
};
use mapforge::seed::{derive_seed, digest_hex};
use mapforge::{Error, Result};
use serde::Serialize;

use crate::config::RunConfig;
use crate::{Cli, Command, EvalArgs, FreqArgs, GenTripletsArgs, PerturbArgs, RenderArgs, SynthSceneArgs};

pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    let ctx = Ctx {
        seed: cli.seed,
        json: cli.json,
        argv,
    };
    match cli.command {
        Command::SynthScene(a) => synth_scene(&ctx, a),
        Command::Perturb(a) => perturb_map(&ctx, a),
        Command::Render(a) => render(&ctx, a),
        Command::GenTriplets(a) => gen_triplets(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Freq(a) => freq(&ctx, a),
        Command::Rerun { config } => rerun(&config),
        Command::Oracle(c) => crate::oracle::run(c, ctx.json),
    }
}

struct Ctx<'a> {
    seed: u64,
    json: bool,
    argv: &'a [String],
}

impl Ctx<'_> {
    fn config(&self, command: &str, settings: impl Serialize) -> RunConfig {
        RunConfig::new(command, self.seed, self.argv, settings)
    }

    /// Prints `report` as pretty JSON or as `key: value` lines.
    fn emit(&self, report: &impl Serialize) -> Result<()> {
        let value = serde_json::to_value(report)?;
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value)?);
        } else if let serde_json::Value::Object(m) = value {
            for (k, v) in m {
                println!("{k}: {v}");
            }
        } else {
            println!("{value}");
        }
        Ok(())
    }
}

fn rerun(config: &Path) -> Result<()> {
    let cfg = RunConfig::read(config)?;
    let cli = Cli::try_parse_from(&cfg.argv).map_err(|e| Error::InvalidParameter(format!("recorded arguments: {e}")))?;
    if matches!(cli.command, Command::Rerun { .. }) {
        return Err(Error::InvalidParameter("a recorded run cannot itself be a rerun".into()));
    }
    run(cli, &cfg.argv)
}

fn ego_pose(map: &VectorMap, [x, y, yaw]: [f64; 3]) -> SE3Pose {
    let p = Point2::new(x, y);
    SE3Pose::from_yaw(p.with_z(map.ground.height_at_clamped(p)), yaw)
}

fn save_image(img: &RasterImage, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    match path.extension().and_then(|e| e.to_str()) {
        #[cfg(feature = "png")]
        Some("png") => img.save_png(path),
        Some("ppm") | None => img.save_ppm(path),
        Some(other) => Err(Error::InvalidParameter(format!("unsupported image extension .{other}"))),
    }
}

fn file_digest(path: &Path) -> Result<String> {
    Ok(digest_hex(&fs::read(path)?))
}

fn synth_scene(ctx: &Ctx, a: SynthSceneArgs) -> Result<()> {
    let params = SceneParams {
        length: a.length,
        lanes_forward: a.lanes_forward,
        lanes_backward: a.lanes_backward,
        lane_width: a.lane_width,
        curve_radius: a.curve_radius,
        slope: a.slope,
        crosswalks: if a.no_crosswalks { vec![] } else { a.crosswalks.clone() },
        intersection_at: (!a.no_intersection).then_some(a.intersection_at),
        cameras: a.cameras,
        image_width: a.image_size.0,
        image_height: a.image_size.1,
        focal: a.focal,
        ..SceneParams::default()
    };
    let scene = generate_scene(&params, ctx.seed)?;
    save_scene(&scene, &a.out)?;
    ctx.config("synth-scene", &params).write(&a.out)?;

    #[derive(Serialize)]
    struct Report {
        log_id: String,
        out: PathBuf,
        lanes: usize,
        crosswalks: usize,
        sweeps: usize,
        cameras: usize,
    }
    ctx.emit(&Report {
        log_id: scene.log_id.clone(),
        out: a.out,
        lanes: scene.map.lanes.len(),
        crosswalks: scene.map.crossings.len(),
        sweeps: scene.trajectory.len(),
        cameras: scene.rig.len(),
    })
}

fn perturb_map(ctx: &Ctx, a: PerturbArgs) -> Result<()> {
    let map = load_map(&a.map)?;
    let ego = ego_pose(&map, a.ego);
    let seed = derive_seed(ctx.seed, "perturb", 0);
    let (changed, record) = perturb(&map, a.change_type, &VisibilityWindow::new(ego), seed)?;
    fs::create_dir_all(&a.out)?;
    let map_path = a.out.join("map.json");
    let record_path = a.out.join("record.json");
    save_map(&changed, &map_path)?;
    fs::write(&record_path, record.to_json()?)?;
    ctx.config("perturb", &a).write(&a.out)?;

    #[derive(Serialize)]
    struct Report {
        change_type: ChangeType,
        map: PathBuf,
        record: PathBuf,
        map_digest: String,
        record_digest: String,
    }
    ctx.emit(&Report {
        change_type: a.change_type,
        map_digest: file_digest(&map_path)?,
        record_digest: file_digest(&record_path)?,
        map: map_path,
        record: record_path,
    })
}

fn read_depth_csv(path: &Path) -> Result<Vec<[f64; 3]>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format("depth csv", e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::format("depth csv", e.to_string()))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|v| v.parse().map_err(|_| Error::format("depth csv", format!("bad number {v:?}"))))
            .collect::<Result<_>>()?;
        let [u, v, d] = vals[..] else {
            return Err(Error::format("depth csv", format!("expected 3 columns, got {}", vals.len())));
        };
        out.push([u, v, d]);
    }
    Ok(out)
}

fn render(ctx: &Ctx, a: RenderArgs) -> Result<()> {
    let map = load_map(&a.map)?;
    let ego = ego_pose(&map, a.pose);
    let style = RenderStyle::default();
    let img = if a.bev {
        render_map_bev(&map, &ego, a.size, a.resolution, &style)?
    } else {
        let (w, h) = a.image_size;
        let camera = CameraModel::mounted(w, h, a.focal, Point3::new(0.0, 0.0, a.camera_height), 0.0, a.pitch)?;
        let depth = match &a.depth {
            Some(p) => interpolate_depth_map(&read_depth_csv(p)?, &camera),
            None => DepthMap::infinite(w, h),
        };
        render_map_egoview(&map, &camera, &ego, &depth, &style)
    };
    save_image(&img, &a.out)?;
    let dir = a.out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    ctx.config("render", &a).write(dir)?;

    #[derive(Serialize)]
    struct Report {
        out: PathBuf,
        width: usize,
        height: usize,
        digest: String,
    }
    ctx.emit(&Report {
        width: img.width(),
        height: img.height(),
        digest: digest_hex(img.as_bytes()),
        out: a.out,
    })
}

fn gen_triplets(ctx: &Ctx, a: GenTripletsArgs) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let types = if a.types.is_empty() { ChangeType::ALL.to_vec() } else { a.types.clone() };
    let opts = PipelineOptions {
        size: a.size,
        resolution: a.resolution,
        stride: a.stride,
        style: RenderStyle::default(),
    };
    let seed = derive_seed(ctx.seed, "gen-triplets", 0);
    let triplets = generate_triplets(&scene, &types, a.negatives, seed, &opts)?;
    let manifest = write_triplets(&triplets, &scene.log_id, &a.out)?;
    ctx.config("gen-triplets", &a).write(&a.out)?;

    #[derive(Serialize)]
    struct Report {
        manifest: PathBuf,
        frames: usize,
        triplets: usize,
        mismatches: usize,
        per_type: std::collections::BTreeMap<&'static str, usize>,
        digest: String,
    }
    let mut per_type = std::collections::BTreeMap::new();
    for t in &types {
        per_type.insert(t.as_str(), 0);
    }
    for r in triplets.iter().filter_map(|t| t.record.as_ref()) {
        *per_type.entry(r.change_type.as_str()).or_default() += 1;
    }
    ctx.emit(&Report {
        manifest,
        frames: triplets.iter().filter(|t| t.label == TripletLabel::Match).count(),
        triplets: triplets.len(),
        mismatches: triplets.iter().filter(|t| t.label == TripletLabel::Mismatch).count(),
        per_type,
        digest: triplets_digest(&triplets)?,
    })
}

fn eval(ctx: &Ctx, a: EvalArgs) -> Result<()> {
    let rows = read_predictions_csv(fs::File::open(&a.predictions)?)?;
    let rows: Vec<_> = rows.into_iter().filter(|r| a.mode.is_none_or(|m| m == r.mode)).collect();
    if rows.is_empty() {
        return Err(Error::EmptyInput("prediction rows"));
    }
    let pairs: Vec<(Label, Label)> = if a.annotations.is_empty() {
        rows.iter().map(|r| (r.prediction, r.label)).collect()
    } else {
        let annotations = a
            .annotations
            .iter()
            .map(|p| Ok(PerturbationRecord::from_json(&fs::read_to_string(p)?)?.annotation()))
            .collect::<Result<Vec<_>>>()?;
        let poses_path = a.poses.as_ref().expect("clap requires --poses with --annotations");
        let poses = read_pose_history(BufReader::new(fs::File::open(poses_path)?))?;
        rows.iter()
            .map(|r| {
                let rec = poses
                    .iter()
                    .find(|p| p.timestamp_ns as i64 == r.timestamp_ns)
                    .ok_or_else(|| Error::format("pose history", format!("no pose at timestamp {}", r.timestamp_ns)))?;
                Ok((r.prediction, label_frame(&rec.pose()?, &annotations, a.mode.unwrap_or(r.mode), a.range)))
            })
            .collect::<Result<_>>()?
    };
    let report = metrics_report(&ConfusionMatrix2::from_pairs(pairs))?;
    if let Some(out) = &a.out {
        write_report(out, &report)?;
        ctx.config("eval", &a).write(out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")))?;
    }
    ctx.emit(&report)
}

fn write_report(path: &Path, report: &impl Serialize) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

fn freq(ctx: &Ctx, a: FreqArgs) -> Result<()> {
    let log = read_visits_csv(fs::File::open(&a.visits)?)?;
    let report = frequency_report(&log, a.min_visits)?;
    if let Some(out) = &a.out {
        write_report(out, &report)?;
        ctx.config("freq", &a).write(out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new(".")))?;
    }
    ctx.emit(&report)
}
