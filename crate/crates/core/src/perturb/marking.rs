use rand::Rng;
use serde_json::Value;

use super::{lanes_touching, param, ChangeType, PerturbationRecord, VisibilityWindow, MAX_ATTEMPTS};
use crate::error::{Error, Result};
use crate::eval::ChangeGeometry;
use crate::geometry::Polyline3;
use crate::map::{
    boundary_mean_distance, sample_lane_sequence, LaneBoundary, LaneId, LaneMarkColor, LaneMarkType, Side, VectorMap,
    BOUNDARY_MATCH_TOLERANCE,
};
use crate::seed::{rng_from_seed, SimRng};

/// Number of consecutive lane segments whose boundary is modified.
pub const MARKING_CHAIN_LENGTH: usize = 3;

struct Chain {
    lanes: Vec<LaneId>,
    side: Side,
    polyline: Polyline3,
    attempts: usize,
}

/// Samples a 3-segment boundary chain that reaches into the window interior
/// and passes `accept`.
fn sample_chain(
    map: &VectorMap,
    window: &VisibilityWindow,
    rng: &mut SimRng,
    change_type: ChangeType,
    accept: impl Fn(&[&LaneBoundary]) -> bool,
) -> Result<Chain> {
    let interior = window.interior();
    let starts = lanes_touching(map, &interior);
    if starts.is_empty() {
        return Err(Error::NoEligibleEntity(change_type));
    }
    for attempt in 1..=MAX_ATTEMPTS {
        let start = starts[rng.random_range(0..starts.len())].id;
        let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
        let Ok(lanes) = sample_lane_sequence(map, start, MARKING_CHAIN_LENGTH, rng) else {
            continue;
        };
        let boundaries: Vec<&LaneBoundary> = lanes.iter().map(|id| map.lanes[id].boundary(side)).collect();
        if !accept(&boundaries) {
            continue;
        }
        let Ok(polyline) =
            Polyline3::from_points_dedup(boundaries.iter().flat_map(|b| b.polyline.points().iter().copied()))
        else {
            continue;
        };
        if !interior.intersects_polyline(&polyline) {
            continue;
        }
        return Ok(Chain {
            lanes,
            side,
            polyline,
            attempts: attempt,
        });
    }
    Err(Error::RejectionExhausted {
        change_type,
        attempts: MAX_ATTEMPTS,
    })
}

/// Boundaries elsewhere in the map describing the same painted line as
/// `(lane, side)`: same polyline up to the match tolerance, in either
/// direction. The flag is true when the twin runs the other way.
fn twins(map: &VectorMap, lane: LaneId, side: Side) -> Vec<(LaneId, Side, bool)> {
    let target = &map.lanes[&lane].boundary(side).polyline;
    let mut out = Vec::new();
    for (id, other) in &map.lanes {
        for s in [Side::Left, Side::Right] {
            if *id == lane && s == side {
                continue;
            }
            let b = &other.boundary(s).polyline;
            for reversed in [false, true] {
                if boundary_mean_distance(target, b, reversed).is_ok_and(|d| d < BOUNDARY_MATCH_TOLERANCE) {
                    out.push((*id, s, reversed));
                    break;
                }
            }
        }
    }
    out
}

fn mirrored(t: LaneMarkType) -> LaneMarkType {
    match t {
        LaneMarkType::DashSolid => LaneMarkType::SolidDash,
        LaneMarkType::SolidDash => LaneMarkType::DashSolid,
        other => other,
    }
}

/// Applies `paint` to every boundary of the chain and to their twins.
fn repaint(map: &VectorMap, chain: &Chain, paint: impl Fn(&LaneBoundary) -> (LaneMarkType, LaneMarkColor)) -> VectorMap {
    let mut out = map.clone();
    for id in &chain.lanes {
        let original = map.lanes[id].boundary(chain.side);
        let (t, c) = paint(original);
        for (tid, tside, reversed) in twins(map, *id, chain.side) {
            let b = out.lanes.get_mut(&tid).expect("twin lane exists").boundary_mut(tside);
            b.mark_type = if reversed { mirrored(t) } else { t };
            b.color = c;
        }
        let b = out.lanes.get_mut(id).expect("chain lane exists").boundary_mut(chain.side);
        b.mark_type = t;
        b.color = c;
    }
    out
}

fn record(change_type: ChangeType, chain: &Chain, seed: u64, extra: Vec<(&str, Value)>) -> PerturbationRecord {
    let mut sampled_params: std::collections::BTreeMap<String, Value> = [
        ("lane_ids".to_string(), param(&chain.lanes)),
        ("side".to_string(), param(chain.side)),
        ("attempts".to_string(), param(chain.attempts)),
    ]
    .into_iter()
    .collect();
    sampled_params.extend(extra.into_iter().map(|(k, v)| (k.to_string(), v)));
    PerturbationRecord {
        change_type,
        entity_geometry: ChangeGeometry::Polyline(chain.polyline.clone()),
        sampled_params,
        seed,
    }
}

/// Erases the paint of a 3-segment boundary chain.
pub fn delete_lane_marking(
    map: &VectorMap,
    window: &VisibilityWindow,
    seed: u64,
) -> Result<(VectorMap, PerturbationRecord)> {
    let mut rng = rng_from_seed(seed);
    let ct = ChangeType::DeleteLaneMarking;
    let chain = sample_chain(map, window, &mut rng, ct, |bs| bs.iter().all(|b| b.is_painted()))?;
    let out = repaint(map, &chain, |_| (LaneMarkType::None, LaneMarkColor::Implicit));
    Ok((out, record(ct, &chain, seed, vec![])))
}

/// Recolors a 3-segment boundary chain to a color other than the current
/// one, which is read from the first boundary of the chain.
pub fn change_marking_color(
    map: &VectorMap,
    window: &VisibilityWindow,
    seed: u64,
) -> Result<(VectorMap, PerturbationRecord)> {
    let mut rng = rng_from_seed(seed);
    let ct = ChangeType::ChangeMarkingColor;
    let chain = sample_chain(map, window, &mut rng, ct, |_| true)?;
    let current = map.lanes[&chain.lanes[0]].boundary(chain.side).color;
    let choices: Vec<LaneMarkColor> = LaneMarkColor::ALL.into_iter().filter(|c| *c != current).collect();
    let new = choices[rng.random_range(0..choices.len())];
    let out = repaint(map, &chain, |b| {
        let t = match (new, b.mark_type) {
            (LaneMarkColor::Implicit, _) => LaneMarkType::None,
            (_, LaneMarkType::None) => LaneMarkType::Solid,
            (_, t) => t,
        };
        (t, new)
    });
    Ok((out, record(ct, &chain, seed, vec![("old_color", param(current)), ("new_color", param(new))])))
}

/// Replaces the line pattern of a painted 3-segment boundary chain,
/// keeping its color.
pub fn change_marking_structure(
    map: &VectorMap,
    window: &VisibilityWindow,
    seed: u64,
) -> Result<(VectorMap, PerturbationRecord)> {
    let mut rng = rng_from_seed(seed);
    let ct = ChangeType::ChangeMarkingStructure;
    let chain = sample_chain(map, window, &mut rng, ct, |bs| bs.iter().all(|b| b.is_painted()))?;
    let current = map.lanes[&chain.lanes[0]].boundary(chain.side).mark_type;
    let choices: Vec<LaneMarkType> = LaneMarkType::PAINTED.into_iter().filter(|t| *t != current).collect();
    let new = choices[rng.random_range(0..choices.len())];
    let out = repaint(map, &chain, |b| (new, b.color));
    Ok((out, record(ct, &chain, seed, vec![("old_type", param(current)), ("new_type", param(new))])))
}
