//! Map rasterization: top-down (BEV) and forward camera (ego-view) renders
//! with LiDAR-style occlusion.
//!
//! Layers are painted back to front: drivable area, lane polygons, lane
//! boundaries, crosswalks. Implicit (unpainted) boundaries are drawn red.

mod camera;
mod depth;
mod ego;
mod image;
mod raster;

use crate::error::{Error, Result};
use crate::geometry::{Aabb2, Point2, Polyline3, SE3Pose};
use crate::map::{lane_polygon, LaneBoundary, LaneMarkColor, LaneMarkType, VectorMap};

pub use camera::CameraModel;
pub use depth::{interpolate_depth_map, occlusion_filter, DepthMap, OCCLUSION_TOLERANCE};
pub use ego::{render_map_egoview, EGO_VIEW_RANGE, NEAR_PLANE};
pub use image::{image_file_name, GeoRef, ImageKind, RasterImage, Rgb};
pub use raster::{scan_polygon, stroke_quads};

/// Default BEV raster: 2000 px at 2 cm/px, i.e. ±20 m.
pub const BEV_SIZE: usize = 2000;
pub const BEV_RESOLUTION: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub drivable_area: Rgb,
    pub lane_interior: Rgb,
    pub implicit_boundary: Rgb,
    pub white_paint: Rgb,
    pub yellow_paint: Rgb,
    pub stripe_light: Rgb,
    pub stripe_dark: Rgb,
    pub line_width: f64,
    pub double_line_offset: f64,
    pub dash_on: f64,
    pub dash_off: f64,
    pub stripe_width: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            drivable_area: Rgb([64, 64, 64]),
            lane_interior: Rgb([128, 128, 128]),
            implicit_boundary: Rgb::RED,
            white_paint: Rgb::WHITE,
            yellow_paint: Rgb::YELLOW,
            stripe_light: Rgb::WHITE,
            stripe_dark: Rgb([160, 160, 160]),
            line_width: 0.1,
            double_line_offset: 0.1,
            dash_on: 1.5,
            dash_off: 1.0,
            stripe_width: 0.3,
        }
    }
}

impl RenderStyle {
    pub fn boundary_color(&self, color: LaneMarkColor) -> Rgb {
        match color {
            LaneMarkColor::White => self.white_paint,
            LaneMarkColor::Yellow => self.yellow_paint,
            LaneMarkColor::Implicit => self.implicit_boundary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    DrivableArea,
    LanePolygon,
    LaneBoundary,
    Crosswalk,
}

/// A filled planar region in the city frame, ready to rasterize.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub layer: Layer,
    pub color: Rgb,
    pub outline: Vec<Point2>,
    /// Outline is a convex quad (strokes, stripes).
    pub convex: bool,
}

/// Center lines of the painted strokes of one boundary, each tagged
/// dashed or not.
fn boundary_lines(b: &LaneBoundary, style: &RenderStyle) -> Vec<(Polyline3, bool)> {
    let o = style.double_line_offset;
    let line = &b.polyline;
    match b.mark_type {
        LaneMarkType::Solid | LaneMarkType::None => vec![(line.clone(), false)],
        LaneMarkType::Dashed => vec![(line.clone(), true)],
        LaneMarkType::DoubleSolid => vec![(line.offset_left(o), false), (line.offset_left(-o), false)],
        LaneMarkType::DashSolid => vec![(line.offset_left(o), true), (line.offset_left(-o), false)],
        LaneMarkType::SolidDash => vec![(line.offset_left(o), false), (line.offset_left(-o), true)],
    }
}

fn densify(line: &Polyline3, step: f64) -> Vec<Point2> {
    let n = ((line.length() / step).ceil() as usize + 1).max(2);
    match line.resample(n) {
        Ok(l) => l.xy(),
        Err(_) => line.xy(),
    }
}

/// Every map entity as filled shapes in painting order. Entities whose
/// bounding box misses `region` are skipped. With `densify_step`, stroke
/// center lines are resampled to that spacing first.
pub fn map_shapes(map: &VectorMap, style: &RenderStyle, region: Option<&Aabb2>, densify_step: Option<f64>) -> Vec<Shape> {
    let near = |pts: &[Point2]| region.is_none_or(|r| r.overlaps(&Aabb2::from_points(pts.iter().copied())));
    let mut out = Vec::new();
    for area in &map.drivable_areas {
        let v = area.polygon.vertices().to_vec();
        if near(&v) {
            out.push(Shape {
                layer: Layer::DrivableArea,
                color: style.drivable_area,
                outline: v,
                convex: false,
            });
        }
    }
    for lane in map.lanes.values() {
        if let Ok(poly) = lane_polygon(lane) {
            let v = poly.vertices().to_vec();
            if near(&v) {
                out.push(Shape {
                    layer: Layer::LanePolygon,
                    color: style.lane_interior,
                    outline: v,
                    convex: false,
                });
            }
        }
    }
    let pad = style.line_width + style.double_line_offset;
    for lane in map.lanes.values() {
        for b in [&lane.left, &lane.right] {
            let bb = Aabb2::from_points(b.polyline.xy());
            let padded = Aabb2 {
                min: Point2::new(bb.min.x - pad, bb.min.y - pad),
                max: Point2::new(bb.max.x + pad, bb.max.y + pad),
            };
            if region.is_some_and(|r| !r.overlaps(&padded)) {
                continue;
            }
            let color = style.boundary_color(b.color);
            for (line, dashed) in boundary_lines(b, style) {
                let pieces = if dashed { line.dashes(style.dash_on, style.dash_off) } else { vec![line] };
                for piece in pieces {
                    let pts = match densify_step {
                        Some(step) => densify(&piece, step),
                        None => piece.xy(),
                    };
                    for q in stroke_quads(&pts, style.line_width) {
                        out.push(Shape {
                            layer: Layer::LaneBoundary,
                            color,
                            outline: q.to_vec(),
                            convex: true,
                        });
                    }
                }
            }
        }
    }
    for c in &map.crossings {
        let [a0, a1, b1, b0] = c.vertices3().map(|p| p.xy());
        if !near(&[a0, a1, b1, b0]) {
            continue;
        }
        let len = a0.distance(a1);
        let n = (len / style.stripe_width).ceil().max(1.0) as usize;
        for k in 0..n {
            let t0 = (k as f64 * style.stripe_width / len).min(1.0);
            let t1 = ((k + 1) as f64 * style.stripe_width / len).min(1.0);
            if t1 <= t0 {
                continue;
            }
            out.push(Shape {
                layer: Layer::Crosswalk,
                color: if k % 2 == 0 { style.stripe_light } else { style.stripe_dark },
                outline: vec![a0.lerp(a1, t0), a0.lerp(a1, t1), b0.lerp(b1, t1), b0.lerp(b1, t0)],
                convex: true,
            });
        }
    }
    out
}

/// Top-down render centered on the ego position, north up.
pub fn render_map_bev(
    map: &VectorMap,
    ego: &SE3Pose,
    size: usize,
    resolution: f64,
    style: &RenderStyle,
) -> Result<RasterImage> {
    let center = ego.translation().xy();
    if !map.ground.contains(center) {
        return Err(Error::OutsideGrid { x: center.x, y: center.y });
    }
    let mut img = RasterImage::centered(center, size, resolution)?;
    paint_shapes(map, style, &mut img);
    Ok(img)
}

/// Top-down render of an arbitrary rectangle; pixel (0, 0) sits at the
/// region's north-west corner.
pub fn render_map_region(map: &VectorMap, region: &Aabb2, resolution: f64, style: &RenderStyle) -> Result<RasterImage> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidGeometry(format!("resolution {resolution}")));
    }
    let w = ((region.max.x - region.min.x) / resolution).ceil().max(1.0) as usize;
    let h = ((region.max.y - region.min.y) / resolution).ceil().max(1.0) as usize;
    let mut img = RasterImage::new(w, h);
    img.georef = Some(GeoRef {
        origin: Point2::new(region.min.x, region.max.y),
        resolution,
    });
    paint_shapes(map, style, &mut img);
    Ok(img)
}

fn paint_shapes(map: &VectorMap, style: &RenderStyle, img: &mut RasterImage) {
    let geo = img.georef.expect("georeferenced image");
    let (w, h) = (img.width(), img.height());
    let extent = Aabb2 {
        min: Point2::new(geo.origin.x, geo.origin.y - h as f64 * geo.resolution),
        max: Point2::new(geo.origin.x + w as f64 * geo.resolution, geo.origin.y),
    };
    for shape in map_shapes(map, style, Some(&extent), None) {
        let px: Vec<[f64; 2]> = shape.outline.iter().map(|p| geo.to_pixel(*p)).collect();
        scan_polygon(&px, w, h, |c, r| img.set(c, r, shape.color));
    }
}

#[cfg(test)]
mod tests;
