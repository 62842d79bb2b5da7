use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::save_map;
use crate::ortho::{write_pose_history, PoseRecord};

use super::scene::{generate_scene, SceneParams, SyntheticScene};

pub const SCENE_FILE: &str = "scene.json";

#[derive(Serialize, Deserialize)]
struct SceneFile {
    log_id: String,
    seed: u64,
    params: SceneParams,
}

#[derive(Serialize)]
struct CameraFile {
    camera_id: usize,
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    /// ego_from_camera rotation, (w, x, y, z).
    rotation: [f64; 4],
    translation: [f64; 3],
}

/// Writes `scene.json` (parameters and seed), `map.json` with its grid,
/// `trajectory.jsonl`, `rig.json` and the ground texture `texture.ppm`.
pub fn save_scene(scene: &SyntheticScene, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let head = SceneFile {
        log_id: scene.log_id.clone(),
        seed: scene.seed,
        params: scene.params.clone(),
    };
    fs::write(dir.join(SCENE_FILE), serde_json::to_string_pretty(&head)? + "\n")?;
    save_map(&scene.map, &dir.join("map.json"))?;
    let poses: Vec<PoseRecord> = scene
        .trajectory
        .iter()
        .zip(&scene.timestamps_ns)
        .map(|(p, t)| PoseRecord::new(*t, p))
        .collect();
    write_pose_history(&poses, fs::File::create(dir.join("trajectory.jsonl"))?)?;
    let rig: Vec<CameraFile> = scene
        .rig
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let t = c.ego_from_camera.translation();
            CameraFile {
                camera_id: i,
                fx: c.fx,
                fy: c.fy,
                cx: c.cx,
                cy: c.cy,
                width: c.width,
                height: c.height,
                rotation: c.ego_from_camera.rotation(),
                translation: [t.x, t.y, t.z],
            }
        })
        .collect();
    fs::write(dir.join("rig.json"), serde_json::to_string_pretty(&rig)? + "\n")?;
    scene.texture.save_ppm(&dir.join("texture.ppm"))
}

/// Rebuilds a scene from its `scene.json`. The other files are exports;
/// generation is deterministic so they are reproduced exactly.
pub fn load_scene(dir: &Path) -> Result<SyntheticScene> {
    let text = fs::read_to_string(dir.join(SCENE_FILE))?;
    let head: SceneFile = serde_json::from_str(&text)?;
    let scene = generate_scene(&head.params, head.seed)?;
    if scene.log_id != head.log_id {
        return Err(Error::format("scene file", format!("log id {} does not match seed {}", head.log_id, head.seed)));
    }
    Ok(scene)
}
