use std::collections::BTreeMap;

use rand::Rng;

use super::{lanes_touching, param, ChangeType, PerturbationRecord, VisibilityWindow, MAX_ATTEMPTS};
use crate::error::{Error, Result};
use crate::eval::ChangeGeometry;
use crate::geometry::Polyline3;
use crate::map::{
    centerline, rightmost_lane, sample_lane_sequence, LaneBoundary, LaneId, LaneMarkColor, LaneMarkType, LaneSegment,
    LaneType, VectorMap,
};
use crate::seed::rng_from_seed;

/// Number of consecutive segments converted.
pub const BIKE_CHAIN_LENGTH: usize = 5;

/// Splits a lane along its centerline. The left half keeps the vehicle
/// role and id; the right half becomes a bike lane with id `bike_id`. The
/// shared boundary is a solid white line.
pub fn split_lane(lane: &LaneSegment, bike_id: LaneId) -> Result<(LaneSegment, LaneSegment)> {
    let n = lane.left.polyline.points().len().max(lane.right.polyline.points().len()).max(2);
    let middle = LaneBoundary::new(centerline(lane, n)?, LaneMarkType::Solid, LaneMarkColor::White)?;
    let vehicle = LaneSegment {
        id: lane.id,
        left: lane.left.clone(),
        right: middle.clone(),
        successors: lane.successors.clone(),
        lane_type: lane.lane_type,
        in_intersection: lane.in_intersection,
    };
    let bike = LaneSegment {
        id: bike_id,
        left: middle,
        right: lane.right.clone(),
        successors: lane.successors.clone(),
        lane_type: LaneType::Bike,
        in_intersection: lane.in_intersection,
    };
    Ok((vehicle, bike))
}

/// Converts the right half of five consecutive rightmost lanes into a bike
/// lane.
pub fn add_bike_lane(
    map: &VectorMap,
    window: &VisibilityWindow,
    seed: u64,
) -> Result<(VectorMap, PerturbationRecord)> {
    let mut rng = rng_from_seed(seed);
    let ct = ChangeType::AddBikeLane;
    let interior = window.interior();
    let starts = lanes_touching(map, &interior);
    if starts.is_empty() {
        return Err(Error::NoEligibleEntity(ct));
    }
    'attempt: for attempt in 1..=MAX_ATTEMPTS {
        let start = starts[rng.random_range(0..starts.len())].id;
        let Ok(seq) = sample_lane_sequence(map, start, BIKE_CHAIN_LENGTH, &mut rng) else {
            continue;
        };
        let mut targets = Vec::with_capacity(seq.len());
        for id in &seq {
            let Ok(r) = rightmost_lane(map, *id) else {
                continue 'attempt;
            };
            if targets.contains(&r) || map.lanes[&r].lane_type != LaneType::Vehicle {
                continue 'attempt;
            }
            targets.push(r);
        }

        let first_id = map.next_lane_id().0;
        let bike_of: BTreeMap<LaneId, LaneId> =
            targets.iter().zip(first_id..).map(|(t, id)| (*t, LaneId(id))).collect();
        let mut out = map.clone();
        let mut middles = Vec::new();
        for t in &targets {
            let Ok((vehicle, mut bike)) = split_lane(&map.lanes[t], bike_of[t]) else {
                continue 'attempt;
            };
            bike.successors = vehicle.successors.iter().map(|s| *bike_of.get(s).unwrap_or(s)).collect();
            middles.push(vehicle.right.polyline.clone());
            out.lanes.insert(vehicle.id, vehicle);
            out.lanes.insert(bike.id, bike);
        }
        let Ok(polyline) = Polyline3::from_points_dedup(middles.iter().flat_map(|m| m.points().iter().copied())) else {
            continue;
        };
        if !interior.intersects_polyline(&polyline) || out.validate().is_err() {
            continue;
        }
        let record = PerturbationRecord {
            change_type: ct,
            entity_geometry: ChangeGeometry::Polyline(polyline),
            sampled_params: [
                ("lane_ids".to_string(), param(&targets)),
                ("bike_lane_ids".to_string(), param(bike_of.values().collect::<Vec<_>>())),
                ("attempts".to_string(), param(attempt)),
            ]
            .into_iter()
            .collect(),
            seed,
        };
        return Ok((out, record));
    }
    Err(Error::RejectionExhausted {
        change_type: ct,
        attempts: MAX_ATTEMPTS,
    })
}
