//! JSON map files plus the binary ground-height raster they reference.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    DrivableArea, GroundHeightGrid, LaneBoundary, LaneId, LaneMarkColor, LaneMarkType, LaneSegment, LaneType,
    PedestrianCrossing, VectorMap,
};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3, Polygon2, Polyline3};

/// Ground raster header: ASCII tag padded with NULs to 16 bytes.
pub const GRID_MAGIC: &[u8; 16] = b"MAPFORGE-GRID\n\0\0";

#[derive(Serialize, Deserialize)]
struct MapFile {
    lane_segments: Vec<LaneFile>,
    pedestrian_crossings: Vec<CrossingFile>,
    drivable_areas: Vec<AreaFile>,
    ground: GroundFile,
}

#[derive(Serialize, Deserialize)]
struct BoundaryFile {
    points: Vec<[f64; 3]>,
    mark_type: LaneMarkType,
    color: LaneMarkColor,
}

#[derive(Serialize, Deserialize)]
struct LaneFile {
    id: LaneId,
    left: BoundaryFile,
    right: BoundaryFile,
    successors: Vec<LaneId>,
    lane_type: LaneType,
    in_intersection: bool,
}

#[derive(Serialize, Deserialize)]
struct CrossingFile {
    edge1: Vec<[f64; 3]>,
    edge2: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
struct AreaFile {
    vertices: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct GroundFile {
    grid_file: String,
    origin: [f64; 2],
    resolution: f64,
    width: usize,
    height: usize,
}

/// Rounds to the 0.01 m storage grid (and folds -0 into 0).
fn quantize(v: f64) -> f64 {
    (v * 100.0).round() / 100.0 + 0.0
}

fn q3(p: &Point3) -> [f64; 3] {
    [quantize(p.x), quantize(p.y), quantize(p.z)]
}

fn boundary_file(b: &LaneBoundary) -> BoundaryFile {
    BoundaryFile {
        points: b.polyline.points().iter().map(q3).collect(),
        mark_type: b.mark_type,
        color: b.color,
    }
}

fn polyline(entity: &str, pts: &[[f64; 3]]) -> Result<Polyline3> {
    Polyline3::new(pts.iter().map(|&p| p.into()).collect()).map_err(|e| Error::validation(entity, e.to_string()))
}

fn boundary(entity: &str, b: &BoundaryFile) -> Result<LaneBoundary> {
    LaneBoundary::new(polyline(entity, &b.points)?, b.mark_type, b.color).map_err(|e| Error::validation(entity, e.to_string()))
}

/// Serializes the map document with vertices quantized to 0.01 m.
pub fn map_to_json(map: &VectorMap, grid_file: &str) -> Result<String> {
    let doc = MapFile {
        lane_segments: map
            .lanes
            .values()
            .map(|l| LaneFile {
                id: l.id,
                left: boundary_file(&l.left),
                right: boundary_file(&l.right),
                successors: l.successors.clone(),
                lane_type: l.lane_type,
                in_intersection: l.in_intersection,
            })
            .collect(),
        pedestrian_crossings: map
            .crossings
            .iter()
            .map(|c| CrossingFile {
                edge1: c.edge1.points().iter().map(q3).collect(),
                edge2: c.edge2.points().iter().map(q3).collect(),
            })
            .collect(),
        drivable_areas: map
            .drivable_areas
            .iter()
            .map(|d| AreaFile {
                vertices: d.polygon.vertices().iter().map(|p| [quantize(p.x), quantize(p.y)]).collect(),
            })
            .collect(),
        ground: GroundFile {
            grid_file: grid_file.to_string(),
            origin: [map.ground.origin.x, map.ground.origin.y],
            resolution: map.ground.resolution,
            width: map.ground.width,
            height: map.ground.height,
        },
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn write_grid(grid: &GroundHeightGrid, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + 4 * grid.heights.len());
    bytes.extend_from_slice(GRID_MAGIC);
    for h in &grid.heights {
        bytes.extend_from_slice(&h.to_le_bytes());
    }
    fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

/// Reads the raw heights of a grid file; dimensions come from the map JSON.
pub fn read_grid(path: &Path, expected: usize) -> Result<Vec<f32>> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 || &bytes[..16] != GRID_MAGIC {
        return Err(Error::format("ground grid", format!("{} lacks the grid header", path.display())));
    }
    let body = &bytes[16..];
    if body.len() != 4 * expected {
        return Err(Error::format(
            "ground grid",
            format!("expected {expected} heights, file holds {} bytes", body.len()),
        ));
    }
    Ok(body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
}

/// Writes `path` (JSON) and `<stem>.grid` next to it.
pub fn save_map(map: &VectorMap, path: &Path) -> Result<()> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("map");
    let grid_name = format!("{stem}.grid");
    let grid_path = path.with_file_name(&grid_name);
    write_grid(&map.ground, &grid_path)?;
    fs::write(path, map_to_json(map, &grid_name)?)?;
    Ok(())
}

pub fn load_map(path: &Path) -> Result<VectorMap> {
    let doc: MapFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let grid_path = path.parent().unwrap_or(Path::new(".")).join(&doc.ground.grid_file);
    let g = &doc.ground;
    let heights = read_grid(&grid_path, g.width * g.height)?;
    let ground = GroundHeightGrid::new(Point2::new(g.origin[0], g.origin[1]), g.resolution, g.width, g.height, heights)?;

    let mut lanes = Vec::with_capacity(doc.lane_segments.len());
    for l in &doc.lane_segments {
        let entity = format!("lane {}", l.id);
        lanes.push(LaneSegment {
            id: l.id,
            left: boundary(&entity, &l.left)?,
            right: boundary(&entity, &l.right)?,
            successors: l.successors.clone(),
            lane_type: l.lane_type,
            in_intersection: l.in_intersection,
        });
    }
    let mut crossings = Vec::with_capacity(doc.pedestrian_crossings.len());
    for (i, c) in doc.pedestrian_crossings.iter().enumerate() {
        let entity = format!("pedestrian crossing {i}");
        crossings.push(
            PedestrianCrossing::new(polyline(&entity, &c.edge1)?, polyline(&entity, &c.edge2)?)
                .map_err(|e| Error::validation(&entity, e.to_string()))?,
        );
    }
    let mut areas = Vec::with_capacity(doc.drivable_areas.len());
    for (i, d) in doc.drivable_areas.iter().enumerate() {
        let polygon = Polygon2::new(d.vertices.iter().map(|&p| p.into()).collect())
            .map_err(|e| Error::validation(format!("drivable area {i}"), e.to_string()))?;
        areas.push(DrivableArea { polygon });
    }
    VectorMap::new(lanes, crossings, areas, ground)
}
