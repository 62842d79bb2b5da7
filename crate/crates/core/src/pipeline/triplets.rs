use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::eval::{label_frame, EvalMode, Label};
use crate::geometry::SE3Pose;
use crate::ortho::{
    cull_frustum, raycast_frame, render_sensor_bev, tessellate_ground, FrameSource, RenderTrigger, SweepRingBuffer,
    MESH_RADIUS,
};
use crate::perturb::{perturb, ChangeType, PerturbationRecord, VisibilityWindow};
use crate::render::{image_file_name, render_map_bev, ImageKind, RasterImage, RenderStyle};
use crate::seed::{derive_seed, rng_from_seed};

use super::scene::SyntheticScene;
use super::sensor::{SensorSource, SyntheticSensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TripletLabel {
    Match,
    Mismatch,
}

impl From<Label> for TripletLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Changed => TripletLabel::Mismatch,
            Label::Unchanged => TripletLabel::Match,
        }
    }
}

/// Map render, sensor render and whether they agree. A record is present
/// exactly when the map was perturbed.
#[derive(Debug, Clone)]
pub struct TrainingTriplet {
    pub frame_id: String,
    pub timestamp_ns: u64,
    pub ego: SE3Pose,
    pub map_render: RasterImage,
    pub sensor_render: RasterImage,
    pub label: TripletLabel,
    pub record: Option<PerturbationRecord>,
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// BEV side length in pixels.
    pub size: usize,
    /// BEV meters per pixel.
    pub resolution: f64,
    /// Camera pixel stride for ray casting.
    pub stride: usize,
    pub style: RenderStyle,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            size: 400,
            resolution: 0.1,
            stride: 1,
            style: RenderStyle::default(),
        }
    }
}

/// One sensor BEV render and the pose it was made at.
#[derive(Debug, Clone)]
pub struct SensorFrame {
    pub index: usize,
    pub timestamp_ns: u64,
    pub ego: SE3Pose,
    pub render: RasterImage,
}

/// Streams the scene's sweeps through the ring buffer and renders a
/// sensor BEV every 5 m of travel once the buffer is full. Frames are only
/// read up to the sweep being rendered.
pub fn render_sensor_frames<S: SensorSource>(
    scene: &SyntheticScene,
    source: &mut S,
    opts: &PipelineOptions,
) -> Result<Vec<SensorFrame>> {
    let mut buffer = SweepRingBuffer::default();
    let mut trigger = RenderTrigger::new();
    let mut frames = Vec::new();
    for (sweep, ego) in scene.trajectory.iter().enumerate() {
        let mesh = tessellate_ground(&scene.map.ground, ego.translation().xy(), MESH_RADIUS)?;
        let mut points = Vec::new();
        for (c, camera) in scene.rig.iter().enumerate() {
            let (image, timestamp_ns) = source.read(sweep, c)?;
            let culled = cull_frustum(&mesh, camera, ego);
            let source = FrameSource {
                camera_id: c as u32,
                timestamp_ns,
            };
            points.extend(raycast_frame(&image, camera, ego, &culled, opts.stride, source)?.points);
        }
        buffer.push(points);
        if trigger.update(ego) && buffer.is_full() {
            let timestamp_ns = scene.timestamps_ns[sweep];
            source.on_render(timestamp_ns);
            frames.push(SensorFrame {
                index: frames.len(),
                timestamp_ns,
                ego: *ego,
                render: render_sensor_bev(&buffer, ego, opts.size, opts.resolution)?,
            });
        }
    }
    Ok(frames)
}

/// MATCH when there is no record or its entity lies beyond `range` in the
/// chosen labeling mode.
pub fn label_triplet(record: Option<&PerturbationRecord>, ego: &SE3Pose, mode: EvalMode, range: f64) -> TripletLabel {
    match record {
        None => TripletLabel::Match,
        Some(r) => label_frame(ego, &[r.annotation()], mode, range).into(),
    }
}

/// Triplets from the scene's own cameras.
pub fn generate_triplets(
    scene: &SyntheticScene,
    change_types: &[ChangeType],
    negatives_per_frame: usize,
    seed: u64,
    opts: &PipelineOptions,
) -> Result<Vec<TrainingTriplet>> {
    generate_triplets_from(scene, &mut SyntheticSensor::new(scene), change_types, negatives_per_frame, seed, opts)
}

/// Per frame: one MATCH triplet, then up to `negatives_per_frame`
/// MISMATCH triplets of distinct change types tried in a seeded random
/// order. Types that fail to apply, or whose map render is unchanged,
/// are skipped.
pub fn generate_triplets_from<S: SensorSource>(
    scene: &SyntheticScene,
    source: &mut S,
    change_types: &[ChangeType],
    negatives_per_frame: usize,
    seed: u64,
    opts: &PipelineOptions,
) -> Result<Vec<TrainingTriplet>> {
    if negatives_per_frame == 0 {
        return Err(Error::InvalidParameter("negatives_per_frame must be at least 1".into()));
    }
    let mut types: Vec<ChangeType> = Vec::new();
    for t in change_types {
        if !types.contains(t) {
            types.push(*t);
        }
    }
    let frames = render_sensor_frames(scene, source, opts)?;
    let per_frame: Vec<Vec<TrainingTriplet>> = frames
        .into_par_iter()
        .map(|f| frame_triplets(scene, f, &types, negatives_per_frame, seed, opts))
        .collect::<Result<_>>()?;
    Ok(per_frame.into_iter().flatten().collect())
}

fn frame_triplets(
    scene: &SyntheticScene,
    frame: SensorFrame,
    types: &[ChangeType],
    negatives: usize,
    seed: u64,
    opts: &PipelineOptions,
) -> Result<Vec<TrainingTriplet>> {
    let k = frame.index as u64;
    let frame_id = format!("{:04}_{}", frame.index, frame.timestamp_ns);
    let map_render = render_map_bev(&scene.map, &frame.ego, opts.size, opts.resolution, &opts.style)?;
    let mut order = types.to_vec();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, "frame", k)));

    let window = VisibilityWindow::new(frame.ego);
    let mut out = vec![TrainingTriplet {
        frame_id: frame_id.clone(),
        timestamp_ns: frame.timestamp_ns,
        ego: frame.ego,
        map_render: map_render.clone(),
        sensor_render: frame.render.clone(),
        label: TripletLabel::Match,
        record: None,
    }];
    for t in order {
        if out.len() > negatives {
            break;
        }
        let Ok((changed, record)) = perturb(&scene.map, t, &window, derive_seed(seed, t.as_str(), k)) else {
            continue;
        };
        let render = render_map_bev(&changed, &frame.ego, opts.size, opts.resolution, &opts.style)?;
        if render.as_bytes() == map_render.as_bytes() {
            continue;
        }
        out.push(TrainingTriplet {
            frame_id: frame_id.clone(),
            timestamp_ns: frame.timestamp_ns,
            ego: frame.ego,
            map_render: render,
            sensor_render: frame.render.clone(),
            label: TripletLabel::Mismatch,
            record: Some(record),
        });
    }
    Ok(out)
}

/// SHA-256 over every triplet's id, label, record and render bytes.
pub fn triplets_digest(triplets: &[TrainingTriplet]) -> Result<String> {
    let mut h = Sha256::new();
    for t in triplets {
        h.update(t.frame_id.as_bytes());
        h.update(t.timestamp_ns.to_le_bytes());
        h.update(serde_json::to_vec(&t.label)?);
        if let Some(r) = &t.record {
            h.update(r.to_json()?.as_bytes());
        }
        h.update(t.map_render.as_bytes());
        h.update(t.sensor_render.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

/// One line of the triplet manifest. Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub frame_id: String,
    pub map_image: String,
    pub sensor_image: String,
    pub label: TripletLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub change_type: Option<ChangeType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_file: Option<String>,
}

fn rel(parts: &[&str]) -> String {
    parts.join("/")
}

/// Writes images, records and `manifest.jsonl` under `out/{log_id}/`.
/// Returns the manifest path.
pub fn write_triplets(triplets: &[TrainingTriplet], log_id: &str, out: &Path) -> Result<PathBuf> {
    let root = out.join(log_id);
    fs::create_dir_all(&root)?;
    let mut manifest = Vec::new();
    for t in triplets {
        let dir = rel(&["frames", &t.frame_id]);
        fs::create_dir_all(root.join(&dir))?;
        let sensor_image = rel(&[&dir, &image_file_name(log_id, t.timestamp_ns, ImageKind::SensorBev, "ppm")]);
        let map_name = image_file_name(log_id, t.timestamp_ns, ImageKind::MapBev, "ppm");
        let (map_image, record_file) = match &t.record {
            None => (rel(&[&dir, &map_name]), None),
            Some(r) => {
                let tag = r.change_type.as_str().to_ascii_lowercase();
                let record_file = rel(&[&dir, &format!("{tag}_record.json")]);
                fs::write(root.join(&record_file), r.to_json()?)?;
                (rel(&[&dir, &format!("{tag}_{map_name}")]), Some(record_file))
            }
        };
        let sensor_path = root.join(&sensor_image);
        if !sensor_path.exists() {
            t.sensor_render.save_ppm(&sensor_path)?;
        }
        t.map_render.save_ppm(&root.join(&map_image))?;
        let entry = ManifestEntry {
            frame_id: t.frame_id.clone(),
            map_image,
            sensor_image,
            label: t.label,
            change_type: t.record.as_ref().map(|r| r.change_type),
            record_file,
        };
        serde_json::to_writer(&mut manifest, &entry)?;
        manifest.push(b'\n');
    }
    let path = root.join("manifest.jsonl");
    fs::File::create(&path)?.write_all(&manifest)?;
    Ok(path)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
