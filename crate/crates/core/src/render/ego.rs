use crate::geometry::{triangulate, Aabb2, Point2, Point3, Polygon2, SE3Pose};
use crate::map::VectorMap;

use super::camera::CameraModel;
use super::depth::{DepthMap, OCCLUSION_TOLERANCE};
use super::image::RasterImage;
use super::raster::scan_polygon;
use super::{map_shapes, Layer, RenderStyle, Rgb};

/// Map entities farther than this (ℓ∞, meters) from the ego are skipped.
pub const EGO_VIEW_RANGE: f64 = 60.0;
/// Geometry closer than this to the camera plane is clipped.
pub const NEAR_PLANE: f64 = 0.05;
const STROKE_STEP: f64 = 0.1;
const MAX_TRIANGLE_EDGE: f64 = 2.0;

struct Primitive {
    layer: Layer,
    key: f64,
    color: Rgb,
    tri: [Point3; 3],
}

fn subdivide(t: [Point2; 3], out: &mut Vec<[Point2; 3]>) {
    let longest = (0..3).map(|i| t[i].distance(t[(i + 1) % 3])).fold(0.0, f64::max);
    if longest <= MAX_TRIANGLE_EDGE {
        out.push(t);
        return;
    }
    let m = [t[0].lerp(t[1], 0.5), t[1].lerp(t[2], 0.5), t[2].lerp(t[0], 0.5)];
    subdivide([t[0], m[0], m[2]], out);
    subdivide([m[0], t[1], m[1]], out);
    subdivide([m[2], m[1], t[2]], out);
    subdivide([m[0], m[1], m[2]], out);
}

/// Keeps the part of a camera-frame polygon with z ≥ near.
fn clip_near(poly: &[Point3]) -> Vec<Point3> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ina, inb) = (a.z >= NEAR_PLANE, b.z >= NEAR_PLANE);
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (NEAR_PLANE - a.z) / (b.z - a.z);
            let mut p = a.lerp(b, t);
            p.z = NEAR_PLANE;
            out.push(p);
        }
    }
    out
}

/// Forward-camera render of the map. Entities are lifted onto the ground
/// grid, clipped at the near plane and painted by layer, far to near.
/// Pixels whose map depth lies more than the occlusion tolerance behind
/// `depth` stay unpainted.
pub fn render_map_egoview(
    map: &VectorMap,
    camera: &CameraModel,
    ego: &SE3Pose,
    depth: &DepthMap,
    style: &RenderStyle,
) -> RasterImage {
    let (w, h) = (camera.width, camera.height);
    let mut img = RasterImage::new(w, h);
    let cam_from_city = camera.camera_from_city(ego);
    let region = Aabb2::around(ego.translation().xy(), EGO_VIEW_RANGE);
    let lift = |p: Point2| cam_from_city.transform_point(p.with_z(map.ground.height_at_clamped(p)));

    let mut prims = Vec::new();
    let mut tris2 = Vec::new();
    for shape in map_shapes(map, style, Some(&region), Some(STROKE_STEP)) {
        tris2.clear();
        let base: Vec<[Point2; 3]> = if shape.convex {
            (1..shape.outline.len() - 1)
                .map(|i| [shape.outline[0], shape.outline[i], shape.outline[i + 1]])
                .collect()
        } else {
            match Polygon2::new(shape.outline.clone()) {
                Ok(p) => triangulate(&p),
                Err(_) => continue,
            }
        };
        for t in base {
            subdivide(t, &mut tris2);
        }
        for t in &tris2 {
            let tri = t.map(lift);
            if tri.iter().all(|p| p.z < NEAR_PLANE) {
                continue;
            }
            prims.push(Primitive {
                layer: shape.layer,
                key: (tri[0].z + tri[1].z + tri[2].z) / 3.0,
                color: shape.color,
                tri,
            });
        }
    }
    prims.sort_by(|a, b| a.layer.cmp(&b.layer).then(b.key.total_cmp(&a.key)));

    for prim in &prims {
        let [a, b, c] = prim.tri;
        let n = (b - a).cross(c - a);
        if n.norm() < 1e-14 {
            continue;
        }
        let d = n.dot(a);
        let clipped = clip_near(&prim.tri);
        if clipped.len() < 3 {
            continue;
        }
        let px: Vec<[f64; 2]> = clipped.iter().filter_map(|p| camera.project(*p)).collect();
        scan_polygon(&px, w, h, |col, row| {
            let ray = camera.pixel_ray(col as f64 + 0.5, row as f64 + 0.5);
            let denom = n.dot(ray);
            if denom.abs() < 1e-14 {
                return;
            }
            let z = d / denom;
            if z > 0.0 && z <= depth.get(col, row) + OCCLUSION_TOLERANCE {
                img.set(col, row, prim.color);
            }
        });
    }
    img
}
