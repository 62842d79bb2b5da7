//! Small hand-built maps used by tests, examples and the CLI demo paths.

use crate::geometry::{Aabb2, Point2, Point3, Polyline3};
use crate::map::{
    GroundHeightGrid, LaneBoundary, LaneId, LaneMarkColor, LaneMarkType, LaneSegment, LaneType, PedestrianCrossing,
    VectorMap,
};

pub fn polyline(pts: &[[f64; 3]]) -> Polyline3 {
    Polyline3::new(pts.iter().map(|&p| p.into()).collect()).expect("fixture polyline")
}

/// Straight segment from `a` to `b` with `n` evenly spaced vertices at height `z`.
pub fn straight(a: Point2, b: Point2, n: usize, z: f64) -> Polyline3 {
    Polyline3::new((0..n).map(|i| a.lerp(b, i as f64 / (n - 1) as f64).with_z(z)).collect()).expect("fixture line")
}

pub type Paint = (LaneMarkType, LaneMarkColor);

pub const SOLID_WHITE: Paint = (LaneMarkType::Solid, LaneMarkColor::White);
pub const DASHED_WHITE: Paint = (LaneMarkType::Dashed, LaneMarkColor::White);
pub const DOUBLE_YELLOW: Paint = (LaneMarkType::DoubleSolid, LaneMarkColor::Yellow);
pub const IMPLICIT: Paint = (LaneMarkType::None, LaneMarkColor::Implicit);

/// Lane whose centerline runs from `start` to `end`.
pub fn straight_lane(id: u64, start: Point2, end: Point2, width: f64, left: Paint, right: Paint) -> LaneSegment {
    let dir = (end - start).normalized().expect("fixture lane direction");
    let off = dir.perp() * (0.5 * width);
    LaneSegment {
        id: LaneId(id),
        left: LaneBoundary::new(straight(start + off, end + off, 5, 0.0), left.0, left.1).unwrap(),
        right: LaneBoundary::new(straight(start - off, end - off, 5, 0.0), right.0, right.1).unwrap(),
        successors: vec![],
        lane_type: LaneType::Vehicle,
        in_intersection: false,
    }
}

/// Flat ground covering `bounds` with a margin, 0.3 m cells.
pub fn flat_ground(bounds: Aabb2, margin: f64) -> GroundHeightGrid {
    let b = Aabb2 {
        min: Point2::new(bounds.min.x - margin, bounds.min.y - margin),
        max: Point2::new(bounds.max.x + margin, bounds.max.y + margin),
    };
    GroundHeightGrid::covering(b, crate::map::DEFAULT_GROUND_RESOLUTION, 0.0).expect("fixture ground")
}

/// Parameters of [`parallel_road`].
#[derive(Debug, Clone)]
pub struct RoadSpec {
    pub lanes: usize,
    pub segments: usize,
    pub x0: f64,
    pub x1: f64,
    pub lane_width: f64,
    /// y of the leftmost boundary.
    pub y_left: f64,
}

impl Default for RoadSpec {
    fn default() -> Self {
        RoadSpec {
            lanes: 2,
            segments: 5,
            x0: -40.0,
            x1: 40.0,
            lane_width: 3.5,
            y_left: 0.0,
        }
    }
}

/// Lane id of lane `k` (0 = leftmost) in segment `s`.
pub fn road_lane_id(k: usize, s: usize) -> LaneId {
    LaneId((k * 100 + s) as u64)
}

/// Multi-lane road heading +x, split into equal segments chained by
/// successors. Leftmost boundary is double yellow, lane dividers dashed
/// white, the rightmost boundary solid white.
pub fn parallel_road_lanes(spec: &RoadSpec) -> Vec<LaneSegment> {
    let seg_len = (spec.x1 - spec.x0) / spec.segments as f64;
    let mut lanes = Vec::new();
    for k in 0..spec.lanes {
        let y_l = spec.y_left - k as f64 * spec.lane_width;
        let y_r = y_l - spec.lane_width;
        let left = if k == 0 { DOUBLE_YELLOW } else { DASHED_WHITE };
        let right = if k + 1 == spec.lanes { SOLID_WHITE } else { DASHED_WHITE };
        for s in 0..spec.segments {
            let xa = spec.x0 + s as f64 * seg_len;
            let xb = xa + seg_len;
            let mut lane = LaneSegment {
                id: road_lane_id(k, s),
                left: LaneBoundary::new(straight(Point2::new(xa, y_l), Point2::new(xb, y_l), 5, 0.0), left.0, left.1)
                    .unwrap(),
                right: LaneBoundary::new(straight(Point2::new(xa, y_r), Point2::new(xb, y_r), 5, 0.0), right.0, right.1)
                    .unwrap(),
                successors: vec![],
                lane_type: LaneType::Vehicle,
                in_intersection: false,
            };
            if s + 1 < spec.segments {
                lane.successors.push(road_lane_id(k, s + 1));
            }
            lanes.push(lane);
        }
    }
    lanes
}

pub fn parallel_road(spec: &RoadSpec) -> VectorMap {
    let lanes = parallel_road_lanes(spec);
    let bounds = Aabb2 {
        min: Point2::new(spec.x0, spec.y_left - spec.lanes as f64 * spec.lane_width),
        max: Point2::new(spec.x1, spec.y_left),
    };
    VectorMap::new(lanes, vec![], vec![], flat_ground(bounds, 30.0)).expect("fixture road")
}

/// Axis-aligned crosswalk spanning `y0..y1` at `x = xc ± width/2`.
pub fn crosswalk_across_y(xc: f64, width: f64, y0: f64, y1: f64) -> PedestrianCrossing {
    let h = 0.5 * width;
    PedestrianCrossing::new(
        Polyline3::new(vec![Point3::new(xc - h, y0, 0.0), Point3::new(xc - h, y1, 0.0)]).unwrap(),
        Polyline3::new(vec![Point3::new(xc + h, y0, 0.0), Point3::new(xc + h, y1, 0.0)]).unwrap(),
    )
    .expect("fixture crosswalk")
}
