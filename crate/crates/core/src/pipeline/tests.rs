use super::*;
use crate::eval::EvalMode;
use crate::geometry::{Point3, SE3Pose};
use crate::perturb::{ChangeType, VisibilityWindow};

fn small_opts() -> PipelineOptions {
    PipelineOptions {
        size: 200,
        resolution: 0.2,
        stride: 2,
        ..Default::default()
    }
}

#[test]
fn default_scene_builds() {
    let s = generate_scene(&SceneParams::default(), 1).unwrap();
    assert_eq!(s.trajectory.len(), 201);
    assert_eq!(s.rig.len(), 7);
    assert_eq!(s.map.crossings.len(), 1);
    assert!(s.map.lanes.values().any(|l| l.in_intersection));
    let last = s.trajectory.last().unwrap().translation();
    assert!((last.x - 50.0).abs() < 1e-9 && (last.y + 1.75).abs() < 1e-9);
    assert!(s.texture.georef.is_some());
}

#[test]
fn curved_ramped_scene_follows_ground() {
    let p = SceneParams {
        curve_radius: Some(60.0),
        slope: 0.05,
        ..Default::default()
    };
    let s = generate_scene(&p, 3).unwrap();
    for pose in &s.trajectory {
        let t = pose.translation();
        assert!((t.z - 0.05 * t.x).abs() < 1e-5, "{t:?}");
    }
    let end = s.trajectory.last().unwrap();
    assert!((end.yaw() - 50.0 / 60.0).abs() < 1e-9);
}

#[test]
fn bad_params_rejected() {
    let p = SceneParams {
        ego_lane: 5,
        ..Default::default()
    };
    assert!(matches!(generate_scene(&p, 0), Err(crate::Error::InvalidParameter(_))));
}

#[test]
fn camera_sees_painted_ground() {
    let s = generate_scene(&SceneParams::default(), 1).unwrap();
    let mut sensor = SyntheticSensor::new(&s);
    let (img, ts) = sensor.read(0, 0).unwrap();
    assert_eq!(ts, s.timestamps_ns[0]);
    // forward camera looks down the road; the lower image half is asphalt or paint
    let lit = (0..img.width()).filter(|&u| img.get(u, img.height() - 1).0 != [0, 0, 0]).count();
    assert!(lit > img.width() / 2, "{lit}");
}

#[test]
fn fifty_meters_give_ten_frames() {
    let s = generate_scene(&SceneParams::default(), 1).unwrap();
    let frames = render_sensor_frames(&s, &mut SyntheticSensor::new(&s), &small_opts()).unwrap();
    assert_eq!(frames.len(), 10);
    for (i, f) in frames.iter().enumerate() {
        assert!((f.ego.translation().x - 5.0 * (i + 1) as f64).abs() < 1e-9);
    }
}

#[test]
fn audited_run_never_reads_ahead() {
    let s = generate_scene(&SceneParams::default(), 1).unwrap();
    let mut src = AuditedSource::new(SyntheticSensor::new(&s));
    let log = src.log();
    render_sensor_frames(&s, &mut src, &small_opts()).unwrap();
    let log = log.borrow();
    assert_eq!(log.iter().filter(|e| matches!(e, SourceEvent::Render { .. })).count(), 10);
    assert!(anticipation_violations(&log).is_empty());

    let bad = [
        SourceEvent::Read { timestamp_ns: 5 },
        SourceEvent::Render { timestamp_ns: 4 },
    ];
    assert_eq!(anticipation_violations(&bad), vec![(4, 5)]);
}

#[test]
fn triplets_follow_invariants() {
    let s = generate_scene(&SceneParams::default(), 1).unwrap();
    let trips = generate_triplets(&s, &ChangeType::ALL, 3, 9, &small_opts()).unwrap();
    let matches: Vec<_> = trips.iter().filter(|t| t.label == TripletLabel::Match).collect();
    assert_eq!(matches.len(), 10);
    for t in &trips {
        assert_eq!(t.label == TripletLabel::Mismatch, t.record.is_some());
        assert_eq!(t.map_render.georef, t.sensor_render.georef);
        let m = matches.iter().find(|m| m.frame_id == t.frame_id).unwrap();
        if t.label == TripletLabel::Mismatch {
            assert_ne!(t.map_render.as_bytes(), m.map_render.as_bytes());
        }
    }
    for m in &matches {
        let negs: Vec<ChangeType> = trips
            .iter()
            .filter(|t| t.frame_id == m.frame_id)
            .filter_map(|t| t.record.as_ref().map(|r| r.change_type))
            .collect();
        assert!(negs.len() <= 3);
        let mut dedup = negs.clone();
        dedup.sort_by_key(|c| c.as_str());
        dedup.dedup();
        assert_eq!(dedup.len(), negs.len());
    }
    assert!(trips.len() > 10);
}

#[test]
fn no_crosswalk_scene_skips_crosswalk_deletion() {
    let p = SceneParams {
        crosswalks: vec![],
        ..Default::default()
    };
    let s = generate_scene(&p, 2).unwrap();
    let trips = generate_triplets(&s, &[ChangeType::DeleteCrosswalk, ChangeType::InsertCrosswalk], 2, 5, &small_opts()).unwrap();
    let count = |c| trips.iter().filter(|t| t.record.as_ref().is_some_and(|r| r.change_type == c)).count();
    assert_eq!(count(ChangeType::DeleteCrosswalk), 0);
    assert!(count(ChangeType::InsertCrosswalk) > 0);
}

#[test]
fn triplets_deterministic_and_written() {
    let s = generate_scene(&SceneParams::default(), 4).unwrap();
    let types = [ChangeType::ChangeMarkingColor, ChangeType::DeleteLaneMarking];
    let a = generate_triplets(&s, &types, 1, 11, &small_opts()).unwrap();
    let b = generate_triplets(&s, &types, 1, 11, &small_opts()).unwrap();
    assert_eq!(triplets_digest(&a).unwrap(), triplets_digest(&b).unwrap());
    let c = generate_triplets(&s, &types, 1, 12, &small_opts()).unwrap();
    assert_ne!(triplets_digest(&a).unwrap(), triplets_digest(&c).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = write_triplets(&a, &s.log_id, dir.path()).unwrap();
    let entries = read_manifest(&path).unwrap();
    assert_eq!(entries.len(), a.len());
    let root = path.parent().unwrap();
    for e in &entries {
        assert!(root.join(&e.map_image).exists() && root.join(&e.sensor_image).exists());
        assert_eq!(e.record_file.is_some(), e.label == TripletLabel::Mismatch);
        assert_eq!(e.change_type.is_some(), e.record_file.is_some());
    }
    let first = std::fs::read_to_string(&path).unwrap();
    assert!(first.starts_with("{\"frame_id\":\"0000_"));
}

#[test]
fn zero_negatives_rejected() {
    let s = generate_scene(&SceneParams::default(), 1).unwrap();
    assert!(generate_triplets(&s, &ChangeType::ALL, 0, 1, &small_opts()).is_err());
}

#[test]
fn labels_delegate_to_distance() {
    let s = generate_scene(&SceneParams::default(), 1).unwrap();
    let ego = SE3Pose::from_yaw(Point3::new(30.0, -1.75, 0.0), 0.0);
    let (_, rec) = crate::perturb::perturb(&s.map, ChangeType::DeleteCrosswalk, &VisibilityWindow::new(ego), 3).unwrap();
    assert_eq!(label_triplet(None, &ego, EvalMode::Proximity, 20.0), TripletLabel::Match);
    assert_eq!(label_triplet(Some(&rec), &ego, EvalMode::Proximity, 20.0), TripletLabel::Mismatch);
    // crosswalk spans x in [28.5, 31.5]
    let near = SE3Pose::from_yaw(Point3::new(51.4, -1.75, 0.0), 0.0);
    assert_eq!(label_triplet(Some(&rec), &near, EvalMode::Proximity, 20.0), TripletLabel::Mismatch);
    let out = SE3Pose::from_yaw(Point3::new(51.6, -1.75, 0.0), 0.0);
    assert_eq!(label_triplet(Some(&rec), &out, EvalMode::Proximity, 20.0), TripletLabel::Match);
}

#[test]
fn scene_round_trips_through_disk() {
    let s = generate_scene(&SceneParams::default(), 6).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_scene(&s, dir.path()).unwrap();
    for f in ["scene.json", "map.json", "map.grid", "trajectory.jsonl", "rig.json", "texture.ppm"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let t = load_scene(dir.path()).unwrap();
    assert_eq!(t.trajectory, s.trajectory);
    assert_eq!(t.texture, s.texture);
}
