//! The six synthetic map changes: crosswalk insertion and deletion, lane
//! marking deletion, marking color change, marking structure change, and
//! bike-lane insertion.
//!
//! Every generator is a pure function of `(map, window, seed)`. It returns
//! a modified copy of the map plus a [`PerturbationRecord`] locating the
//! change in the city frame. Sampling is rejection-based with a hard cap of
//! [`MAX_ATTEMPTS`] attempts.

mod bike_lane;
mod crosswalk;
mod marking;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::eval::{ChangeAnnotation, ChangeClass, ChangeDirection, ChangeGeometry};
use crate::geometry::{Aabb2, Point2, Point3, Polygon2, Polyline3, SE3Pose};
use crate::map::{lane_polygon, LaneSegment, VectorMap};

pub use bike_lane::{add_bike_lane, split_lane, BIKE_CHAIN_LENGTH};
pub use crosswalk::{
    crosswalk_acceptable, delete_crosswalk, insert_crosswalk, road_span, sample_crosswalk_width, CROSSWALK_IOU_LIMIT,
    CROSSWALK_WAYPOINTS, WIDTH_MAX, WIDTH_MEAN, WIDTH_MIN, WIDTH_STD,
};
pub use marking::{change_marking_color, change_marking_structure, delete_lane_marking, MARKING_CHAIN_LENGTH};

/// Rejection-sampling budget per perturbation.
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChangeType {
    DeleteCrosswalk,
    InsertCrosswalk,
    DeleteLaneMarking,
    ChangeMarkingColor,
    ChangeMarkingStructure,
    AddBikeLane,
}

impl ChangeType {
    pub const ALL: [ChangeType; 6] = [
        ChangeType::DeleteCrosswalk,
        ChangeType::InsertCrosswalk,
        ChangeType::DeleteLaneMarking,
        ChangeType::ChangeMarkingColor,
        ChangeType::ChangeMarkingStructure,
        ChangeType::AddBikeLane,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeType::DeleteCrosswalk => "DELETE_CROSSWALK",
            ChangeType::InsertCrosswalk => "INSERT_CROSSWALK",
            ChangeType::DeleteLaneMarking => "DELETE_LANE_MARKING",
            ChangeType::ChangeMarkingColor => "CHANGE_MARKING_COLOR",
            ChangeType::ChangeMarkingStructure => "CHANGE_MARKING_STRUCTURE",
            ChangeType::AddBikeLane => "ADD_BIKE_LANE",
        }
    }

    pub fn class(self) -> ChangeClass {
        match self {
            ChangeType::DeleteCrosswalk | ChangeType::InsertCrosswalk => ChangeClass::Crosswalk,
            _ => ChangeClass::LaneGeometry,
        }
    }

    pub fn direction(self) -> ChangeDirection {
        match self {
            ChangeType::DeleteCrosswalk | ChangeType::DeleteLaneMarking => ChangeDirection::Deletion,
            ChangeType::InsertCrosswalk | ChangeType::AddBikeLane => ChangeDirection::Addition,
            ChangeType::ChangeMarkingColor | ChangeType::ChangeMarkingStructure => ChangeDirection::Modification,
        }
    }
}

impl fmt::Display for ChangeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ChangeType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        ChangeType::ALL
            .into_iter()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| Error::format("change type", format!("unknown change type {s:?}")))
    }
}

/// Region around the ego pose a change has to stay visible in.
///
/// The rendered map spans ±`half_extent`; changed entities must reach into
/// the inner square of half-size `half_extent - interior_margin` so they
/// survive crop jitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityWindow {
    pub ego_pose: SE3Pose,
    pub half_extent: f64,
    pub interior_margin: f64,
}

impl VisibilityWindow {
    pub fn new(ego_pose: SE3Pose) -> Self {
        VisibilityWindow {
            ego_pose,
            half_extent: 20.0,
            interior_margin: 5.0,
        }
    }

    pub fn center(&self) -> Point2 {
        self.ego_pose.translation().xy()
    }

    pub fn interior_half_extent(&self) -> f64 {
        self.half_extent - self.interior_margin
    }

    pub fn interior(&self) -> Aabb2 {
        Aabb2::around(self.center(), self.interior_half_extent())
    }

    pub fn full(&self) -> Aabb2 {
        Aabb2::around(self.center(), self.half_extent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationRecord {
    pub change_type: ChangeType,
    pub entity_geometry: ChangeGeometry,
    pub sampled_params: BTreeMap<String, Value>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    change_type: ChangeType,
    seed: u64,
    params: BTreeMap<String, Value>,
    geometry: GeometryFile,
}

#[derive(Serialize, Deserialize)]
struct GeometryFile {
    kind: String,
    coordinates: Vec<Vec<f64>>,
}

impl PerturbationRecord {
    pub fn annotation(&self) -> ChangeAnnotation {
        ChangeAnnotation {
            geometry: self.entity_geometry.clone(),
            class: self.change_type.class(),
            direction: self.change_type.direction(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let geometry = match &self.entity_geometry {
            ChangeGeometry::Polygon(p) => GeometryFile {
                kind: "polygon".into(),
                coordinates: p.vertices().iter().map(|v| vec![v.x, v.y]).collect(),
            },
            ChangeGeometry::Polyline(l) => GeometryFile {
                kind: "polyline".into(),
                coordinates: l.points().iter().map(|v| vec![v.x, v.y, v.z]).collect(),
            },
        };
        let mut s = serde_json::to_string_pretty(&RecordFile {
            change_type: self.change_type,
            seed: self.seed,
            params: self.sampled_params.clone(),
            geometry,
        })?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: RecordFile = serde_json::from_str(text)?;
        let bad = || Error::format("perturbation record", "coordinate arity does not match geometry kind");
        let entity_geometry = match f.geometry.kind.as_str() {
            "polygon" => ChangeGeometry::Polygon(Polygon2::new(
                f.geometry
                    .coordinates
                    .iter()
                    .map(|c| (c.len() == 2).then(|| Point2::new(c[0], c[1])).ok_or_else(bad))
                    .collect::<Result<_>>()?,
            )?),
            "polyline" => ChangeGeometry::Polyline(Polyline3::new(
                f.geometry
                    .coordinates
                    .iter()
                    .map(|c| (c.len() == 3).then(|| Point3::new(c[0], c[1], c[2])).ok_or_else(bad))
                    .collect::<Result<_>>()?,
            )?),
            other => return Err(Error::format("perturbation record", format!("unknown geometry kind {other:?}"))),
        };
        Ok(PerturbationRecord {
            change_type: f.change_type,
            entity_geometry,
            sampled_params: f.params,
            seed: f.seed,
        })
    }
}

/// Applies one change type. Deterministic for a fixed `(map, change_type,
/// window, seed)`.
pub fn perturb(
    map: &VectorMap,
    change_type: ChangeType,
    window: &VisibilityWindow,
    seed: u64,
) -> Result<(VectorMap, PerturbationRecord)> {
    match change_type {
        ChangeType::DeleteCrosswalk => delete_crosswalk(map, window, seed),
        ChangeType::InsertCrosswalk => insert_crosswalk(map, window, seed),
        ChangeType::DeleteLaneMarking => delete_lane_marking(map, window, seed),
        ChangeType::ChangeMarkingColor => change_marking_color(map, window, seed),
        ChangeType::ChangeMarkingStructure => change_marking_structure(map, window, seed),
        ChangeType::AddBikeLane => add_bike_lane(map, window, seed),
    }
}

/// Lanes whose polygon reaches into `region`, in id order.
pub(crate) fn lanes_touching<'a>(map: &'a VectorMap, region: &Aabb2) -> Vec<&'a LaneSegment> {
    map.lanes
        .values()
        .filter(|l| lane_polygon(l).is_ok_and(|p| region.intersects_polygon(&p)))
        .collect()
}

pub(crate) fn param(v: impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}
