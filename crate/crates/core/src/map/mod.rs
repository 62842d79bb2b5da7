//! Vector HD map: lane segments with painted boundaries, pedestrian
//! crossings, drivable areas and a ground height raster.

mod ground;
mod io;

use std::collections::BTreeMap;
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb2, Point2, Point3, Polygon2, Polyline3};

pub use ground::{GroundHeightGrid, DEFAULT_GROUND_RESOLUTION};
pub use io::{load_map, map_to_json, read_grid, save_map, write_grid, GRID_MAGIC};

/// Sampling weight of intersection lanes relative to ordinary lanes.
pub const INTERSECTION_WEIGHT: f64 = 4.5;

/// Mean resampled-point distance under which two boundaries are the same
/// physical line.
pub const BOUNDARY_MATCH_TOLERANCE: f64 = 0.5;
const BOUNDARY_MATCH_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LaneId(pub u64);

impl fmt::Display for LaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LaneMarkType {
    Solid,
    Dashed,
    DoubleSolid,
    DashSolid,
    SolidDash,
    None,
}

impl LaneMarkType {
    /// All painted structures.
    pub const PAINTED: [LaneMarkType; 5] = [
        LaneMarkType::Solid,
        LaneMarkType::Dashed,
        LaneMarkType::DoubleSolid,
        LaneMarkType::DashSolid,
        LaneMarkType::SolidDash,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LaneMarkColor {
    White,
    Yellow,
    Implicit,
}

impl LaneMarkColor {
    pub const ALL: [LaneMarkColor; 3] = [LaneMarkColor::White, LaneMarkColor::Yellow, LaneMarkColor::Implicit];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LaneType {
    Vehicle,
    Bike,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneBoundary {
    pub polyline: Polyline3,
    pub mark_type: LaneMarkType,
    pub color: LaneMarkColor,
}

impl LaneBoundary {
    pub fn new(polyline: Polyline3, mark_type: LaneMarkType, color: LaneMarkColor) -> Result<Self> {
        let b = LaneBoundary { polyline, mark_type, color };
        b.check_paint()?;
        Ok(b)
    }

    pub fn implicit(polyline: Polyline3) -> Self {
        LaneBoundary {
            polyline,
            mark_type: LaneMarkType::None,
            color: LaneMarkColor::Implicit,
        }
    }

    pub fn is_painted(&self) -> bool {
        self.color != LaneMarkColor::Implicit
    }

    fn check_paint(&self) -> Result<()> {
        if (self.mark_type == LaneMarkType::None) != (self.color == LaneMarkColor::Implicit) {
            return Err(Error::InvalidGeometry(format!(
                "boundary mark type {:?} inconsistent with color {:?}",
                self.mark_type, self.color
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneSegment {
    pub id: LaneId,
    pub left: LaneBoundary,
    pub right: LaneBoundary,
    pub successors: Vec<LaneId>,
    pub lane_type: LaneType,
    pub in_intersection: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl LaneSegment {
    pub fn boundary(&self, side: Side) -> &LaneBoundary {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    pub fn boundary_mut(&mut self, side: Side) -> &mut LaneBoundary {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }

    pub fn weight(&self) -> f64 {
        if self.in_intersection {
            INTERSECTION_WEIGHT
        } else {
            1.0
        }
    }
}

/// Crosswalk described by its two long edges, both along the principal axis.
///
/// Edges are normalized on construction: they point the same way, and
/// `edge1` is the one whose midpoint has the smaller y (then smaller x).
#[derive(Debug, Clone, PartialEq)]
pub struct PedestrianCrossing {
    pub edge1: Polyline3,
    pub edge2: Polyline3,
}

/// Maximum angle between the two crosswalk edges.
const CROSSWALK_PARALLEL_DEG: f64 = 10.0;

impl PedestrianCrossing {
    pub fn new(edge1: Polyline3, edge2: Polyline3) -> Result<Self> {
        if edge1.points().len() != 2 || edge2.points().len() != 2 {
            return Err(Error::InvalidGeometry("crosswalk edges must have exactly 2 points".into()));
        }
        let dir = |e: &Polyline3| (e.last().xy() - e.first().xy()).normalized();
        let (Some(d1), Some(mut d2)) = (dir(&edge1), dir(&edge2)) else {
            return Err(Error::InvalidGeometry("crosswalk edge has no planar extent".into()));
        };
        let mut edge2 = edge2;
        if d1.dot(d2) < 0.0 {
            edge2 = edge2.reversed();
            d2 = -d2;
        }
        let angle = d1.dot(d2).clamp(-1.0, 1.0).acos().to_degrees();
        if angle >= CROSSWALK_PARALLEL_DEG {
            return Err(Error::InvalidGeometry(format!(
                "crosswalk edges differ by {angle:.1}°, limit {CROSSWALK_PARALLEL_DEG}°"
            )));
        }
        let mid = |e: &Polyline3| e.first().xy().lerp(e.last().xy(), 0.5);
        let (m1, m2) = (mid(&edge1), mid(&edge2));
        let swap = m2.y < m1.y || (m2.y == m1.y && m2.x < m1.x);
        let pc = if swap {
            PedestrianCrossing { edge1: edge2, edge2: edge1 }
        } else {
            PedestrianCrossing { edge1, edge2 }
        };
        pc.polygon()?;
        Ok(pc)
    }

    pub fn polygon(&self) -> Result<Polygon2> {
        Polygon2::new(vec![
            self.edge1.first().xy(),
            self.edge1.last().xy(),
            self.edge2.last().xy(),
            self.edge2.first().xy(),
        ])
    }

    pub fn vertices3(&self) -> [Point3; 4] {
        [self.edge1.first(), self.edge1.last(), self.edge2.last(), self.edge2.first()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivableArea {
    pub polygon: Polygon2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorMap {
    pub lanes: BTreeMap<LaneId, LaneSegment>,
    pub crossings: Vec<PedestrianCrossing>,
    pub drivable_areas: Vec<DrivableArea>,
    pub ground: GroundHeightGrid,
}

impl VectorMap {
    /// Builds and validates a map.
    pub fn new(
        lanes: impl IntoIterator<Item = LaneSegment>,
        crossings: Vec<PedestrianCrossing>,
        drivable_areas: Vec<DrivableArea>,
        ground: GroundHeightGrid,
    ) -> Result<Self> {
        let mut map = VectorMap {
            lanes: BTreeMap::new(),
            crossings,
            drivable_areas,
            ground,
        };
        for lane in lanes {
            if map.lanes.insert(lane.id, lane).is_some() {
                return Err(Error::validation("lane_segments", "duplicate lane id"));
            }
        }
        map.validate()?;
        Ok(map)
    }

    pub fn lane(&self, id: LaneId) -> Result<&LaneSegment> {
        self.lanes.get(&id).ok_or(Error::UnknownLane(id))
    }

    pub fn next_lane_id(&self) -> LaneId {
        LaneId(self.lanes.keys().next_back().map_or(0, |id| id.0 + 1))
    }

    /// Checks graph integrity, paint consistency, boundary orientation and
    /// polygon simplicity.
    pub fn validate(&self) -> Result<()> {
        for (id, lane) in &self.lanes {
            let entity = || format!("lane {id}");
            if *id != lane.id {
                return Err(Error::validation(entity(), format!("keyed under {id} but has id {}", lane.id)));
            }
            for b in [&lane.left, &lane.right] {
                b.check_paint().map_err(|e| Error::validation(entity(), e.to_string()))?;
            }
            for s in &lane.successors {
                if !self.lanes.contains_key(s) {
                    return Err(Error::validation(entity(), format!("successor {s} does not exist")));
                }
            }
            check_orientation(lane).map_err(|e| Error::validation(entity(), e.to_string()))?;
            lane_polygon(lane).map_err(|e| Error::validation(entity(), e.to_string()))?;
        }
        for (i, c) in self.crossings.iter().enumerate() {
            c.polygon()
                .map_err(|e| Error::validation(format!("pedestrian crossing {i}"), e.to_string()))?;
        }
        Ok(())
    }
}

/// Left and right boundaries must run the same way: the mean dot product
/// of per-station tangents has to be positive.
fn check_orientation(lane: &LaneSegment) -> Result<()> {
    let l = crate::geometry::interpolate_polyline(&lane.left.polyline, BOUNDARY_MATCH_SAMPLES)?;
    let r = crate::geometry::interpolate_polyline(&lane.right.polyline, BOUNDARY_MATCH_SAMPLES)?;
    let mut acc = 0.0;
    for i in 0..BOUNDARY_MATCH_SAMPLES - 1 {
        let tl = (l[i + 1] - l[i]).xy().normalized().unwrap_or_default();
        let tr = (r[i + 1] - r[i]).xy().normalized().unwrap_or_default();
        acc += tl.dot(tr);
    }
    if acc <= 0.0 {
        return Err(Error::InvalidGeometry("left and right boundaries run in opposite directions".into()));
    }
    Ok(())
}

/// Pointwise midpoint of both boundaries after resampling each to `n`
/// points by arc length.
pub fn centerline(lane: &LaneSegment, n: usize) -> Result<Polyline3> {
    let l = crate::geometry::interpolate_polyline(&lane.left.polyline, n)?;
    let r = crate::geometry::interpolate_polyline(&lane.right.polyline, n)?;
    Polyline3::from_points_dedup(l.iter().zip(&r).map(|(a, b)| a.lerp(*b, 0.5)))
}

/// Left boundary followed by the reversed right boundary, in 2D.
pub fn lane_polygon(lane: &LaneSegment) -> Result<Polygon2> {
    let mut v: Vec<Point2> = lane.left.polyline.xy();
    v.extend(lane.right.polyline.points().iter().rev().map(|p| p.xy()));
    Polygon2::new(v)
}

/// Mean 2D distance between the two polylines after resampling both to
/// ten points; `reversed` compares `a` against `b` traversed backwards.
pub fn boundary_mean_distance(a: &Polyline3, b: &Polyline3, reversed: bool) -> Result<f64> {
    let pa = crate::geometry::interpolate_polyline(a, BOUNDARY_MATCH_SAMPLES)?;
    let mut pb = crate::geometry::interpolate_polyline(b, BOUNDARY_MATCH_SAMPLES)?;
    if reversed {
        pb.reverse();
    }
    Ok(pa.iter().zip(&pb).map(|(p, q)| p.xy().distance(q.xy())).sum::<f64>() / BOUNDARY_MATCH_SAMPLES as f64)
}

pub fn boundaries_coincide(a: &Polyline3, b: &Polyline3) -> bool {
    boundary_mean_distance(a, b, false).is_ok_and(|d| d < BOUNDARY_MATCH_TOLERANCE)
}

/// The lane whose left boundary coincides with this lane's right boundary.
/// Ties go to the closest match, then the smaller id.
pub fn right_neighbor(map: &VectorMap, lane_id: LaneId) -> Result<Option<LaneId>> {
    let lane = map.lane(lane_id)?;
    let mut best: Option<(f64, LaneId)> = None;
    for (id, other) in &map.lanes {
        if *id == lane_id {
            continue;
        }
        let d = boundary_mean_distance(&lane.right.polyline, &other.left.polyline, false)?;
        if d < BOUNDARY_MATCH_TOLERANCE && best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, *id));
        }
    }
    Ok(best.map(|(_, id)| id))
}

/// Follows right neighbors until none is left.
pub fn rightmost_lane(map: &VectorMap, lane_id: LaneId) -> Result<LaneId> {
    let mut current = lane_id;
    for _ in 0..map.lanes.len() {
        match right_neighbor(map, current)? {
            Some(next) => current = next,
            None => return Ok(current),
        }
    }
    Err(Error::validation(format!("lane {lane_id}"), "right-neighbor chain forms a cycle"))
}

/// Random walk of `length` lanes along successor edges, each successor
/// chosen uniformly.
pub fn sample_lane_sequence<R: Rng + ?Sized>(
    map: &VectorMap,
    start: LaneId,
    length: usize,
    rng: &mut R,
) -> Result<Vec<LaneId>> {
    let mut seq = vec![map.lane(start)?.id];
    while seq.len() < length {
        let last = map.lane(*seq.last().unwrap())?;
        if last.successors.is_empty() {
            return Err(Error::DeadEnd {
                lane: last.id,
                reached: seq.len(),
                requested: length,
            });
        }
        let next = last.successors[rng.random_range(0..last.successors.len())];
        seq.push(next);
    }
    Ok(seq)
}

/// Picks one of `candidates` with probability proportional to its weight
/// (4.5 inside intersections, 1 elsewhere).
pub fn weighted_sample_among<R: Rng + ?Sized>(candidates: &[&LaneSegment], rng: &mut R) -> Result<LaneId> {
    if candidates.is_empty() {
        return Err(Error::EmptyMap);
    }
    let dist = WeightedIndex::new(candidates.iter().map(|l| l.weight())).map_err(|_| Error::EmptyMap)?;
    Ok(candidates[dist.sample(rng)].id)
}

pub fn weighted_sample_lane<R: Rng + ?Sized>(map: &VectorMap, rng: &mut R) -> Result<LaneId> {
    let lanes: Vec<&LaneSegment> = map.lanes.values().collect();
    weighted_sample_among(&lanes, rng)
}

/// Bounding box of every entity in the map.
pub fn map_bounds(map: &VectorMap) -> Option<Aabb2> {
    let pts = map
        .lanes
        .values()
        .flat_map(|l| l.left.polyline.points().iter().chain(l.right.polyline.points()).map(|p| p.xy()))
        .chain(map.crossings.iter().flat_map(|c| c.vertices3().map(|p| p.xy())))
        .chain(map.drivable_areas.iter().flat_map(|d| d.polygon.vertices().iter().copied()))
        .collect::<Vec<_>>();
    (!pts.is_empty()).then(|| Aabb2::from_points(pts))
}

#[cfg(test)]
pub(crate) mod tests;
