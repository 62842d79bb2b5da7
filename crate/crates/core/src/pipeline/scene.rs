use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::{Paint, DASHED_WHITE, DOUBLE_YELLOW, SOLID_WHITE};
use crate::geometry::{Aabb2, Point2, Point3, Polygon2, Polyline3, SE3Pose};
use crate::map::{
    map_bounds, DrivableArea, GroundHeightGrid, LaneBoundary, LaneId, LaneSegment, LaneType, PedestrianCrossing,
    VectorMap, DEFAULT_GROUND_RESOLUTION,
};
use crate::render::{render_map_region, CameraModel, RasterImage, RenderStyle};

/// Margin of road built before the trajectory start and after its end.
const ROAD_MARGIN: f64 = 30.0;
const SHOULDER: f64 = 1.0;
const SAMPLE_STEP: f64 = 1.0;
const GROUND_MARGIN: f64 = 40.0;
const CROSSWALK_WIDTH: f64 = 3.0;
const FIRST_TIMESTAMP_NS: u64 = 1_000_000_000;

/// Parameters of a procedural road scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    /// Trajectory length in meters.
    pub length: f64,
    pub lanes_forward: usize,
    pub lanes_backward: usize,
    pub lane_width: f64,
    pub segment_length: f64,
    /// Left-turning arc radius; `None` for a straight road.
    pub curve_radius: Option<f64>,
    /// Ground slope along the road's start heading (rise over run).
    pub slope: f64,
    /// Arc-length positions of crosswalks.
    pub crosswalks: Vec<f64>,
    /// Arc-length position of a junction; segments containing it are
    /// flagged as intersection lanes.
    pub intersection_at: Option<f64>,
    /// Index of the forward lane the ego drives in (0 = next to the center line).
    pub ego_lane: usize,
    pub sweep_spacing: f64,
    pub sweep_period_ns: u64,
    pub cameras: usize,
    pub image_width: usize,
    pub image_height: usize,
    pub focal: f64,
    pub camera_height: f64,
    pub camera_pitch: f64,
    pub texture_resolution: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        SceneParams {
            length: 50.0,
            lanes_forward: 2,
            lanes_backward: 1,
            lane_width: 3.5,
            segment_length: 10.0,
            curve_radius: None,
            slope: 0.0,
            crosswalks: vec![30.0],
            intersection_at: Some(30.0),
            ego_lane: 0,
            sweep_spacing: 0.25,
            sweep_period_ns: 100_000_000,
            cameras: 7,
            image_width: 64,
            image_height: 48,
            focal: 32.0,
            camera_height: 1.8,
            camera_pitch: 0.35,
            texture_resolution: 0.05,
        }
    }
}

impl SceneParams {
    fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("scene: {what}")));
        if !(self.length > 0.0) || !(self.lane_width > 0.0) || !(self.segment_length > 0.0) {
            return bad("length, lane_width and segment_length must be positive");
        }
        if self.lanes_forward == 0 || self.ego_lane >= self.lanes_forward {
            return bad("needs a forward lane for the ego");
        }
        if !(self.sweep_spacing > 0.0) || self.sweep_period_ns == 0 {
            return bad("sweep spacing and period must be positive");
        }
        if self.cameras == 0 || self.image_width == 0 || self.image_height == 0 || !(self.focal > 0.0) {
            return bad("camera rig");
        }
        if self.curve_radius.is_some_and(|r| r <= (self.lanes_forward.max(self.lanes_backward) as f64 + 1.0) * self.lane_width) {
            return bad("curve radius smaller than the road half-width");
        }
        if !(self.texture_resolution > 0.0) {
            return bad("texture resolution");
        }
        Ok(())
    }
}

/// Road reference line: position and heading at arc length `s`.
#[derive(Debug, Clone, Copy)]
struct Centerline {
    radius: Option<f64>,
}

impl Centerline {
    fn point(&self, s: f64) -> Point2 {
        match self.radius {
            None => Point2::new(s, 0.0),
            Some(r) => Point2::new(r * (s / r).sin(), r * (1.0 - (s / r).cos())),
        }
    }

    fn heading(&self, s: f64) -> f64 {
        self.radius.map_or(0.0, |r| s / r)
    }

    /// Point `offset` meters to the left of the reference line.
    fn at(&self, s: f64, offset: f64) -> Point2 {
        let (sn, cs) = self.heading(s).sin_cos();
        self.point(s) + Point2::new(-sn, cs) * offset
    }
}

/// Procedural scene with a painted-ground texture standing in for the
/// world the cameras see.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub params: SceneParams,
    pub seed: u64,
    pub log_id: String,
    pub map: VectorMap,
    pub trajectory: Vec<SE3Pose>,
    pub timestamps_ns: Vec<u64>,
    pub rig: Vec<CameraModel>,
    pub texture: RasterImage,
}

fn sample_stations(s0: f64, s1: f64) -> Vec<f64> {
    let n = ((s1 - s0) / SAMPLE_STEP).ceil().max(1.0) as usize;
    (0..=n).map(|i| s0 + (s1 - s0) * i as f64 / n as f64).collect()
}

fn lifted(ground: &GroundHeightGrid, pts: impl IntoIterator<Item = Point2>) -> Result<Polyline3> {
    Polyline3::new(pts.into_iter().map(|p| p.with_z(ground.height_at_clamped(p))).collect())
}

fn boundary(ground: &GroundHeightGrid, line: &Centerline, stations: &[f64], offset: f64, reverse: bool, paint: Paint) -> Result<LaneBoundary> {
    let mut pts: Vec<Point2> = stations.iter().map(|s| line.at(*s, offset)).collect();
    if reverse {
        pts.reverse();
    }
    LaneBoundary::new(lifted(ground, pts)?, paint.0, paint.1)
}

/// Paint of a boundary `k` lanes away from the center line on one side of
/// a road with `n` lanes on that side.
fn paint_at(k: usize, n: usize) -> Paint {
    if k == 0 {
        DOUBLE_YELLOW
    } else if k == n {
        SOLID_WHITE
    } else {
        DASHED_WHITE
    }
}

pub fn forward_lane_id(lane: usize, segment: usize) -> LaneId {
    LaneId((lane * 1000 + segment) as u64)
}

pub fn backward_lane_id(lane: usize, segment: usize) -> LaneId {
    LaneId(((100 + lane) * 1000 + segment) as u64)
}

/// Builds a deterministic road scene. The seed only names the log; the
/// geometry is fully given by `params`.
pub fn generate_scene(params: &SceneParams, seed: u64) -> Result<SyntheticScene> {
    params.check()?;
    let line = Centerline {
        radius: params.curve_radius,
    };
    let w = params.lane_width;
    let (s_start, s_end) = (-ROAD_MARGIN, params.length + ROAD_MARGIN);
    let right_extent = params.lanes_forward as f64 * w + SHOULDER;
    let left_extent = params.lanes_backward as f64 * w + SHOULDER;

    let outline_stations = sample_stations(s_start, s_end);
    let mut outline: Vec<Point2> = outline_stations.iter().map(|s| line.at(*s, -right_extent)).collect();
    outline.extend(outline_stations.iter().rev().map(|s| line.at(*s, left_extent)));
    let outline_box = Aabb2::from_points(outline.iter().copied());
    let ground_box = Aabb2 {
        min: Point2::new(outline_box.min.x - GROUND_MARGIN, outline_box.min.y - GROUND_MARGIN),
        max: Point2::new(outline_box.max.x + GROUND_MARGIN, outline_box.max.y + GROUND_MARGIN),
    };
    let origin = Point2::new(ground_box.min.x, ground_box.min.y);
    let res = DEFAULT_GROUND_RESOLUTION;
    let gw = ((ground_box.max.x - origin.x) / res).ceil() as usize + 1;
    let gh = ((ground_box.max.y - origin.y) / res).ceil() as usize + 1;
    let slope = params.slope;
    let ground = GroundHeightGrid::from_fn(origin, res, gw, gh, |x, _| slope * x)?;

    let segments = ((s_end - s_start) / params.segment_length).ceil() as usize;
    let seg_range = |j: usize| {
        let a = s_start + j as f64 * params.segment_length;
        (a, (a + params.segment_length).min(s_end))
    };
    let in_junction = |j: usize| {
        let (a, b) = seg_range(j);
        params.intersection_at.is_some_and(|x| x >= a && x < b)
    };
    let mut lanes = Vec::new();
    for j in 0..segments {
        let (a, b) = seg_range(j);
        let stations = sample_stations(a, b);
        for k in 0..params.lanes_forward {
            let left = boundary(&ground, &line, &stations, -(k as f64) * w, false, paint_at(k, params.lanes_forward))?;
            let right = boundary(&ground, &line, &stations, -((k + 1) as f64) * w, false, paint_at(k + 1, params.lanes_forward))?;
            lanes.push(LaneSegment {
                id: forward_lane_id(k, j),
                left,
                right,
                successors: if j + 1 < segments { vec![forward_lane_id(k, j + 1)] } else { vec![] },
                lane_type: LaneType::Vehicle,
                in_intersection: in_junction(j),
            });
        }
        for k in 0..params.lanes_backward {
            let left = boundary(&ground, &line, &stations, k as f64 * w, true, paint_at(k, params.lanes_backward))?;
            let right = boundary(&ground, &line, &stations, (k + 1) as f64 * w, true, paint_at(k + 1, params.lanes_backward))?;
            lanes.push(LaneSegment {
                id: backward_lane_id(k, j),
                left,
                right,
                successors: if j > 0 { vec![backward_lane_id(k, j - 1)] } else { vec![] },
                lane_type: LaneType::Vehicle,
                in_intersection: in_junction(j),
            });
        }
    }

    let road_lo = -(params.lanes_forward as f64) * w;
    let road_hi = params.lanes_backward as f64 * w;
    let mut crossings = Vec::new();
    for &sc in &params.crosswalks {
        let edge = |s: f64| lifted(&ground, [line.at(s, road_lo), line.at(s, road_hi)]);
        crossings.push(PedestrianCrossing::new(
            edge(sc - 0.5 * CROSSWALK_WIDTH)?,
            edge(sc + 0.5 * CROSSWALK_WIDTH)?,
        )?);
    }
    let drivable = DrivableArea {
        polygon: Polygon2::new(outline)?,
    };
    let map = VectorMap::new(lanes, crossings, vec![drivable], ground)?;

    let ego_offset = -(params.ego_lane as f64 + 0.5) * w;
    let sweeps = (params.length / params.sweep_spacing).round() as usize;
    let mut trajectory = Vec::with_capacity(sweeps + 1);
    let mut timestamps_ns = Vec::with_capacity(sweeps + 1);
    for i in 0..=sweeps {
        let s = i as f64 * params.sweep_spacing;
        let p = line.at(s, ego_offset);
        let z = map.ground.height_at(p)?;
        trajectory.push(SE3Pose::from_yaw(p.with_z(z), line.heading(s)));
        timestamps_ns.push(FIRST_TIMESTAMP_NS + i as u64 * params.sweep_period_ns);
    }

    let rig = (0..params.cameras)
        .map(|c| {
            let yaw = std::f64::consts::TAU * c as f64 / params.cameras as f64;
            CameraModel::mounted(
                params.image_width,
                params.image_height,
                params.focal,
                Point3::new(0.0, 0.0, params.camera_height),
                yaw,
                params.camera_pitch,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let bounds = map_bounds(&map).expect("scene has lanes");
    let texture = render_map_region(&map, &bounds, params.texture_resolution, &RenderStyle::default())?;

    Ok(SyntheticScene {
        params: params.clone(),
        seed,
        log_id: format!("synth-{seed:016x}"),
        map,
        trajectory,
        timestamps_ns,
        rig,
        texture,
    })
}
