//! Training-triplet generation: a procedural scene with painted ground,
//! synthetic cameras looking at it, sensor BEV renders every 5 m, and map
//! renders of the true and perturbed maps at the same viewpoint.

mod io;
mod scene;
mod sensor;
mod triplets;

pub use io::{load_scene, save_scene, SCENE_FILE};
pub use scene::{backward_lane_id, forward_lane_id, generate_scene, SceneParams, SyntheticScene};
pub use sensor::{anticipation_violations, synthesize_camera_image, AuditedSource, SensorSource, SourceEvent, SyntheticSensor};
pub use triplets::{
    generate_triplets, generate_triplets_from, label_triplet, read_manifest, render_sensor_frames, triplets_digest,
    write_triplets, ManifestEntry, PipelineOptions, SensorFrame, TrainingTriplet, TripletLabel,
};

#[cfg(test)]
mod tests;
