use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fixtures::{self, parallel_road, road_lane_id, straight, straight_lane, RoadSpec, SOLID_WHITE};

fn lane_from(left: Polyline3, right: Polyline3) -> LaneSegment {
    LaneSegment {
        id: LaneId(1),
        left: LaneBoundary::new(left, LaneMarkType::Solid, LaneMarkColor::White).unwrap(),
        right: LaneBoundary::new(right, LaneMarkType::Solid, LaneMarkColor::White).unwrap(),
        successors: vec![],
        lane_type: LaneType::Vehicle,
        in_intersection: false,
    }
}

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

#[test]
fn centerline_of_parallel_lines() {
    let lane = lane_from(straight(p(0.0, 3.0), p(10.0, 3.0), 3, 0.0), straight(p(0.0, 0.0), p(10.0, 0.0), 7, 0.0));
    let c = centerline(&lane, 11).unwrap();
    assert!(c.points().iter().all(|q| (q.y - 1.5).abs() < 1e-12));
}

#[test]
fn centerline_of_identical_boundaries() {
    let b = straight(p(0.0, 0.0), p(10.0, 5.0), 4, 1.0);
    let lane = lane_from(b.clone(), b.clone());
    let c = centerline(&lane, 4).unwrap();
    for (a, q) in c.points().iter().zip(b.points()) {
        assert!(a.distance(*q) < 1e-12);
    }
}

#[test]
fn centerline_of_diverging_boundaries() {
    let lane = lane_from(straight(p(0.0, 0.0), p(10.0, 0.0), 2, 0.0), straight(p(0.0, 2.0), p(10.0, 4.0), 2, 0.0));
    let c = centerline(&lane, 21).unwrap();
    for q in c.points() {
        assert!((q.y - (1.0 + q.x / 10.0)).abs() < 1e-12, "{q:?}");
    }
}

#[test]
fn lane_polygon_areas() {
    let rect = straight_lane(1, p(0.0, 0.0), p(10.0, 0.0), 3.0, SOLID_WHITE, SOLID_WHITE);
    assert!((lane_polygon(&rect).unwrap().area() - 30.0).abs() < 1e-9);

    let b = straight(p(0.0, 0.0), p(10.0, 0.0), 2, 0.0);
    assert!(lane_polygon(&lane_from(b.clone(), b)).is_err());

    let trap = lane_from(straight(p(0.0, 1.0), p(10.0, 2.0), 2, 0.0), straight(p(0.0, -1.0), p(10.0, -2.0), 2, 0.0));
    assert!((lane_polygon(&trap).unwrap().area() - 30.0).abs() < 1e-9);
}

#[test]
fn right_neighbors() {
    let two = parallel_road(&RoadSpec { lanes: 2, ..Default::default() });
    assert_eq!(right_neighbor(&two, road_lane_id(0, 2)).unwrap(), Some(road_lane_id(1, 2)));
    assert_eq!(right_neighbor(&two, road_lane_id(1, 2)).unwrap(), None);

    let single = parallel_road(&RoadSpec { lanes: 1, ..Default::default() });
    assert_eq!(right_neighbor(&single, road_lane_id(0, 0)).unwrap(), None);

    let three = parallel_road(&RoadSpec { lanes: 3, ..Default::default() });
    assert_eq!(right_neighbor(&three, road_lane_id(1, 3)).unwrap(), Some(road_lane_id(2, 3)));
    assert_eq!(rightmost_lane(&three, road_lane_id(0, 3)).unwrap(), road_lane_id(2, 3));

    assert!(matches!(right_neighbor(&three, LaneId(9999)), Err(Error::UnknownLane(_))));
}

fn chain_map(successors: &[(u64, &[u64])]) -> VectorMap {
    let lanes = successors.iter().map(|(id, succ)| {
        let y = *id as f64 * 10.0;
        let mut l = straight_lane(*id, p(0.0, y), p(10.0, y), 3.0, SOLID_WHITE, SOLID_WHITE);
        l.successors = succ.iter().map(|&s| LaneId(s)).collect();
        l
    });
    let ground = fixtures::flat_ground(Aabb2::around(Point2::default(), 60.0), 0.0);
    VectorMap::new(lanes, vec![], vec![], ground).unwrap()
}

#[test]
fn lane_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let chain = chain_map(&[(1, &[2]), (2, &[3]), (3, &[])]);
    assert_eq!(
        sample_lane_sequence(&chain, LaneId(1), 3, &mut rng).unwrap(),
        vec![LaneId(1), LaneId(2), LaneId(3)]
    );
    assert!(matches!(
        sample_lane_sequence(&chain, LaneId(2), 3, &mut rng),
        Err(Error::DeadEnd { reached: 2, requested: 3, .. })
    ));

    let fork = chain_map(&[(1, &[2, 3]), (2, &[]), (3, &[])]);
    let draws = 100_000;
    let b = (0..draws)
        .filter(|_| sample_lane_sequence(&fork, LaneId(1), 2, &mut rng).unwrap()[1] == LaneId(2))
        .count();
    let freq = b as f64 / draws as f64;
    assert!((freq - 0.5).abs() < 0.01, "{freq}");
}

#[test]
fn weighted_lane_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut map = chain_map(&[(1, &[]), (2, &[])]);
    map.lanes.get_mut(&LaneId(1)).unwrap().in_intersection = true;
    let draws = 100_000;
    let hits = (0..draws).filter(|_| weighted_sample_lane(&map, &mut rng).unwrap() == LaneId(1)).count();
    let freq = hits as f64 / draws as f64;
    assert!((freq - 4.5 / 5.5).abs() < 0.01, "{freq}");

    map.lanes.get_mut(&LaneId(2)).unwrap().in_intersection = true;
    let hits = (0..draws).filter(|_| weighted_sample_lane(&map, &mut rng).unwrap() == LaneId(1)).count();
    assert!((hits as f64 / draws as f64 - 0.5).abs() < 0.01);

    map.lanes.clear();
    assert!(matches!(weighted_sample_lane(&map, &mut rng), Err(Error::EmptyMap)));
}

#[test]
fn validation_rejects_dangling_successor() {
    let mut lane = straight_lane(1, p(0.0, 0.0), p(10.0, 0.0), 3.0, SOLID_WHITE, SOLID_WHITE);
    lane.successors.push(LaneId(77));
    let ground = fixtures::flat_ground(Aabb2::around(Point2::default(), 20.0), 0.0);
    let err = VectorMap::new([lane], vec![], vec![], ground).unwrap_err();
    assert!(err.to_string().contains("lane 1") && err.to_string().contains("77"), "{err}");
}

#[test]
fn validation_rejects_opposed_boundaries() {
    let lane = lane_from(straight(p(0.0, 1.0), p(10.0, 1.0), 3, 0.0), straight(p(10.0, -1.0), p(0.0, -1.0), 3, 0.0));
    let ground = fixtures::flat_ground(Aabb2::around(Point2::default(), 20.0), 0.0);
    assert!(matches!(VectorMap::new([lane], vec![], vec![], ground), Err(Error::Validation { .. })));
}

#[test]
fn crosswalk_edges_are_normalized() {
    let hi = fixtures::polyline(&[[0.0, 5.0, 0.0], [10.0, 5.0, 0.0]]);
    let lo = fixtures::polyline(&[[10.0, 2.0, 0.0], [0.0, 2.0, 0.0]]);
    let c = PedestrianCrossing::new(hi, lo).unwrap();
    assert_eq!(c.edge1.first().y, 2.0);
    assert!(c.polygon().unwrap().area() > 29.9);
    let skew = fixtures::polyline(&[[0.0, 0.0, 0.0], [10.0, 3.0, 0.0]]);
    let flat = fixtures::polyline(&[[0.0, 3.0, 0.0], [10.0, 3.0, 0.0]]);
    assert!(PedestrianCrossing::new(skew, flat).is_err());
}

#[test]
fn paint_consistency() {
    let l = straight(p(0.0, 0.0), p(1.0, 0.0), 2, 0.0);
    assert!(LaneBoundary::new(l.clone(), LaneMarkType::None, LaneMarkColor::White).is_err());
    assert!(LaneBoundary::new(l.clone(), LaneMarkType::Solid, LaneMarkColor::Implicit).is_err());
    assert!(LaneBoundary::new(l, LaneMarkType::None, LaneMarkColor::Implicit).is_ok());
}

#[test]
fn save_load_save_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut map = parallel_road(&RoadSpec { lanes: 3, ..Default::default() });
    map.crossings.push(fixtures::crosswalk_across_y(3.333_333, 3.0, -10.5, 0.0));
    let path = dir.path().join("map.json");
    save_map(&map, &path).unwrap();
    let first = std::fs::read(&path).unwrap();
    let loaded = load_map(&path).unwrap();
    save_map(&loaded, &path).unwrap();
    assert_eq!(first, std::fs::read(&path).unwrap());
    assert_eq!(loaded.lanes.len(), map.lanes.len());
    let c = &loaded.crossings[0];
    assert!((c.edge1.first().x - 1.83).abs() < 1e-12);
    assert_eq!(loaded.ground, map.ground);
}

#[test]
fn load_reports_entity_ids() {
    let dir = tempfile::tempdir().unwrap();
    let map = parallel_road(&RoadSpec { lanes: 1, segments: 2, ..Default::default() });
    let path = dir.path().join("m.json");
    save_map(&map, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap().replacen("\"successors\": [\n        1\n      ]", "\"successors\": [\n        42\n      ]", 1);
    std::fs::write(&path, text).unwrap();
    let err = load_map(&path).unwrap_err();
    assert!(err.to_string().contains("lane 0") && err.to_string().contains("42"), "{err}");
}

#[test]
fn grid_file_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let g = GroundHeightGrid::flat(Point2::default(), 0.3, 3, 2, 1.5).unwrap();
    let path = dir.path().join("g.grid");
    write_grid(&g, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..14], b"MAPFORGE-GRID\n");
    assert_eq!(bytes.len(), 16 + 6 * 4);
    assert_eq!(read_grid(&path, 6).unwrap(), vec![1.5; 6]);
    assert!(read_grid(&path, 5).is_err());
}
