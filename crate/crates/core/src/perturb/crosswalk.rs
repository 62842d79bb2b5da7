use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{lanes_touching, param, ChangeType, PerturbationRecord, VisibilityWindow, MAX_ATTEMPTS};
use crate::error::{Error, Result};
use crate::eval::ChangeGeometry;
use crate::geometry::{interpolate_polyline, linf_distance, polygon_iou, waypoint_tangent, Point2, Polygon2, Polyline3};
use crate::map::{centerline, lane_polygon, weighted_sample_among, PedestrianCrossing, VectorMap};
use crate::seed::rng_from_seed;

pub const WIDTH_MEAN: f64 = 3.5;
pub const WIDTH_STD: f64 = 1.0;
pub const WIDTH_MIN: f64 = 2.0;
pub const WIDTH_MAX: f64 = 4.0;
/// A new crosswalk may overlap an existing one by at most this IoU.
pub const CROSSWALK_IOU_LIMIT: f64 = 0.05;
/// Number of arc-length waypoints along the sampled lane's centerline.
pub const CROSSWALK_WAYPOINTS: usize = 50;

const SPAN_STEP: f64 = 0.05;
const SPAN_MAX: f64 = 100.0;
const SPAN_TOLERANCE: f64 = 1e-6;

/// Normal(3.5, 1) clipped to [2, 4].
pub fn sample_crosswalk_width<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let n = Normal::new(WIDTH_MEAN, WIDTH_STD).expect("valid normal");
    n.sample(rng).clamp(WIDTH_MIN, WIDTH_MAX)
}

fn on_road(p: Point2, road: &[Polygon2]) -> bool {
    road.iter()
        .any(|poly| poly.contains_strict(p) || poly.boundary_distance(p) <= SPAN_TOLERANCE)
}

/// Intersection of the line `origin + s·axis` with the road surface, as the
/// two endpoints of the covered interval containing `origin`.
///
/// The road is the union of `road` polygons. Returns `None` if `origin`
/// is off-road or the road does not end within 100 m.
pub fn road_span(origin: Point2, axis: Point2, road: &[Polygon2]) -> Option<(Point2, Point2)> {
    if !on_road(origin, road) {
        return None;
    }
    let mut ends = [Point2::new(0.0, 0.0); 2];
    for (end, sign) in ends.iter_mut().zip([1.0, -1.0]) {
        let dir = axis * sign;
        let mut k = 1usize;
        let (mut lo, mut hi) = loop {
            let s = k as f64 * SPAN_STEP;
            if s > SPAN_MAX {
                return None;
            }
            if !on_road(origin + dir * s, road) {
                break (s - SPAN_STEP, s);
            }
            k += 1;
        };
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if on_road(origin + dir * mid, road) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        *end = origin + dir * lo;
    }
    Some((ends[0], ends[1]))
}

/// Whether `candidate` overlaps every existing crosswalk by IoU ≤ 0.05.
pub fn crosswalk_acceptable(candidate: &Polygon2, existing: &[PedestrianCrossing]) -> bool {
    existing
        .iter()
        .filter_map(|c| c.polygon().ok())
        .all(|p| polygon_iou(candidate, &p) <= CROSSWALK_IOU_LIMIT)
}

/// Adds a crosswalk perpendicular to a sampled lane, spanning the full road.
pub fn insert_crosswalk(
    map: &VectorMap,
    window: &VisibilityWindow,
    seed: u64,
) -> Result<(VectorMap, PerturbationRecord)> {
    let mut rng = rng_from_seed(seed);
    let candidates = lanes_touching(map, &window.interior());
    if candidates.is_empty() {
        return Err(Error::NoEligibleEntity(ChangeType::InsertCrosswalk));
    }
    let road: Vec<Polygon2> = lanes_touching(map, &window.full())
        .into_iter()
        .filter_map(|l| lane_polygon(l).ok())
        .collect();
    let center = window.center();
    let reach = window.interior_half_extent();

    for attempt in 1..=MAX_ATTEMPTS {
        let lane_id = weighted_sample_among(&candidates, &mut rng)?;
        let lane = map.lane(lane_id)?;
        let Ok(waypoints) = centerline(lane, CROSSWALK_WAYPOINTS).and_then(|c| interpolate_polyline(&c, CROSSWALK_WAYPOINTS))
        else {
            continue;
        };
        let inside: Vec<usize> = (0..waypoints.len())
            .filter(|&i| linf_distance(waypoints[i].xy(), center) <= reach)
            .collect();
        if inside.is_empty() {
            continue;
        }
        let idx = inside[rng.random_range(0..inside.len())];
        let Ok(tangent) = waypoint_tangent(&waypoints, idx) else {
            continue;
        };
        let axis = tangent.perp();
        let wp = waypoints[idx].xy();
        let width = sample_crosswalk_width(&mut rng);
        let Some((a, b)) = road_span(wp, axis, &road) else {
            continue;
        };
        let half = tangent * (0.5 * width);
        let z = |p: Point2| p.with_z(map.ground.height_at_clamped(p));
        let edge = |off: Point2| Polyline3::new(vec![z(a + off), z(b + off)]);
        let Ok(crossing) = edge(-half).and_then(|e1| PedestrianCrossing::new(e1, edge(half)?)) else {
            continue;
        };
        let polygon = crossing.polygon()?;
        if !crosswalk_acceptable(&polygon, &map.crossings) {
            continue;
        }
        let mut out = map.clone();
        out.crossings.push(crossing);
        let record = PerturbationRecord {
            change_type: ChangeType::InsertCrosswalk,
            entity_geometry: ChangeGeometry::Polygon(polygon),
            sampled_params: [
                ("lane_id", param(lane_id)),
                ("waypoint_index", param(idx)),
                ("waypoint", param([wp.x, wp.y])),
                ("tangent", param([tangent.x, tangent.y])),
                ("width", param(width)),
                ("span_length", param(a.distance(b))),
                ("attempts", param(attempt)),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
            seed,
        };
        return Ok((out, record));
    }
    Err(Error::RejectionExhausted {
        change_type: ChangeType::InsertCrosswalk,
        attempts: MAX_ATTEMPTS,
    })
}

/// Removes one crosswalk that reaches into the window interior, chosen
/// uniformly.
pub fn delete_crosswalk(
    map: &VectorMap,
    window: &VisibilityWindow,
    seed: u64,
) -> Result<(VectorMap, PerturbationRecord)> {
    let mut rng = rng_from_seed(seed);
    let interior = window.interior();
    let eligible: Vec<(usize, Polygon2)> = map
        .crossings
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.polygon().ok().map(|p| (i, p)))
        .filter(|(_, p)| interior.intersects_polygon(p))
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoEligibleEntity(ChangeType::DeleteCrosswalk));
    }
    let (index, polygon) = eligible[rng.random_range(0..eligible.len())].clone();
    let mut out = map.clone();
    out.crossings.remove(index);
    let record = PerturbationRecord {
        change_type: ChangeType::DeleteCrosswalk,
        entity_geometry: ChangeGeometry::Polygon(polygon),
        sampled_params: [("crossing_index".to_string(), param(index)), ("eligible".to_string(), param(eligible.len()))]
            .into_iter()
            .collect(),
        seed,
    };
    Ok((out, record))
}
