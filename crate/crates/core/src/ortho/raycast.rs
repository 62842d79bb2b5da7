use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ray_triangle_intersect, Hit, Point2, Point3, Ray3, SE3Pose};
use crate::render::{CameraModel, RasterImage, Rgb};

use super::mesh::GroundMesh;

const INDEX_CELL: f64 = 1.0;

/// Ground point colored by the camera pixel whose ray hit it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColoredGroundPoint {
    pub position: Point3,
    pub color: Rgb,
    pub camera_id: u32,
    pub timestamp_ns: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSource {
    pub camera_id: u32,
    pub timestamp_ns: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaycastResult {
    pub points: Vec<ColoredGroundPoint>,
    pub rays_cast: u64,
}

/// Uniform xy bucket grid over a mesh; each triangle is listed in every
/// cell its bounding box overlaps.
pub struct MeshIndex<'a> {
    mesh: &'a GroundMesh,
    min: Point2,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl<'a> MeshIndex<'a> {
    pub fn new(mesh: &'a GroundMesh) -> Self {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for t in &mesh.triangles {
            for v in t.vertices() {
                min = Point2::new(min.x.min(v.x), min.y.min(v.y));
                max = Point2::new(max.x.max(v.x), max.y.max(v.y));
            }
        }
        if mesh.triangles.is_empty() {
            return MeshIndex {
                mesh,
                min: Point2::new(0.0, 0.0),
                nx: 0,
                ny: 0,
                cells: Vec::new(),
            };
        }
        let nx = (((max.x - min.x) / INDEX_CELL).ceil() as usize).max(1);
        let ny = (((max.y - min.y) / INDEX_CELL).ceil() as usize).max(1);
        let mut cells = vec![Vec::new(); nx * ny];
        let clamp = |v: f64, n: usize| (v.floor().max(0.0) as usize).min(n - 1);
        for (k, t) in mesh.triangles.iter().enumerate() {
            let vs = t.vertices();
            let (mut lo, mut hi) = (vs[0].xy(), vs[0].xy());
            for v in &vs[1..] {
                lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
                hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
            }
            let (i0, i1) = (clamp((lo.x - min.x) / INDEX_CELL, nx), clamp((hi.x - min.x) / INDEX_CELL, nx));
            let (j0, j1) = (clamp((lo.y - min.y) / INDEX_CELL, ny), clamp((hi.y - min.y) / INDEX_CELL, ny));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * nx + i].push(k as u32);
                }
            }
        }
        MeshIndex { mesh, min, nx, ny, cells }
    }

    fn test_cell(&self, ray: &Ray3, i: usize, j: usize, best: &mut Option<(usize, Hit)>) {
        for &k in &self.cells[j * self.nx + i] {
            if let Some(h) = ray_triangle_intersect(ray, &self.mesh.triangles[k as usize]) {
                if best.is_none_or(|(bk, b)| h.distance < b.distance || (h.distance == b.distance && (k as usize) < bk)) {
                    *best = Some((k as usize, h));
                }
            }
        }
    }

    /// Nearest triangle hit along the ray: 2D DDA through the buckets,
    /// stopping once the best hit lies inside the cells already visited.
    pub fn nearest_hit(&self, ray: &Ray3) -> Option<(usize, Hit)> {
        if self.nx == 0 {
            return None;
        }
        let o = ray.origin;
        let d = ray.direction;
        let size = [self.nx as f64 * INDEX_CELL, self.ny as f64 * INDEX_CELL];
        let lo = [self.min.x, self.min.y];
        let (oa, da) = ([o.x, o.y], [d.x, d.y]);
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for a in 0..2 {
            if da[a].abs() < 1e-15 {
                if oa[a] < lo[a] || oa[a] > lo[a] + size[a] {
                    return None;
                }
            } else {
                let (mut ta, mut tb) = ((lo[a] - oa[a]) / da[a], (lo[a] + size[a] - oa[a]) / da[a]);
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
            }
        }
        if t0 > t1 {
            return None;
        }
        let start = ray.at(t0);
        let cell = |v: f64, a: usize, n: usize| ((((v - lo[a]) / INDEX_CELL).floor().max(0.0)) as usize).min(n - 1);
        let mut ix = cell(start.x, 0, self.nx);
        let mut iy = cell(start.y, 1, self.ny);
        let mut best = None;
        if d.x.abs() < 1e-15 && d.y.abs() < 1e-15 {
            self.test_cell(ray, ix, iy, &mut best);
            return best;
        }
        let setup = |a: usize, i: usize| -> (f64, f64) {
            if da[a].abs() < 1e-15 {
                return (f64::INFINITY, f64::INFINITY);
            }
            let edge = if da[a] > 0.0 { lo[a] + (i + 1) as f64 * INDEX_CELL } else { lo[a] + i as f64 * INDEX_CELL };
            ((edge - oa[a]) / da[a], INDEX_CELL / da[a].abs())
        };
        let (mut tmx, dtx) = setup(0, ix);
        let (mut tmy, dty) = setup(1, iy);
        loop {
            self.test_cell(ray, ix, iy, &mut best);
            let exit = tmx.min(tmy);
            if best.is_some_and(|(_, h)| h.distance <= exit) || exit > t1 {
                return best;
            }
            if tmx <= tmy {
                if d.x > 0.0 {
                    ix += 1;
                    if ix >= self.nx {
                        return best;
                    }
                } else {
                    if ix == 0 {
                        return best;
                    }
                    ix -= 1;
                }
                tmx += dtx;
            } else {
                if d.y > 0.0 {
                    iy += 1;
                    if iy >= self.ny {
                        return best;
                    }
                } else {
                    if iy == 0 {
                        return best;
                    }
                    iy -= 1;
                }
                tmy += dty;
            }
        }
    }

    /// Reference answer: every triangle tested.
    pub fn nearest_hit_brute_force(&self, ray: &Ray3) -> Option<(usize, Hit)> {
        let mut best: Option<(usize, Hit)> = None;
        for (k, t) in self.mesh.triangles.iter().enumerate() {
            if let Some(h) = ray_triangle_intersect(ray, t) {
                if best.is_none_or(|(_, b)| h.distance < b.distance) {
                    best = Some((k, h));
                }
            }
        }
        best
    }
}

/// Casts one ray per sampled pixel (every `stride`-th row and column,
/// through pixel centers) against the mesh and colors each nearest hit
/// with the pixel's value.
pub fn raycast_frame(
    image: &RasterImage,
    camera: &CameraModel,
    ego: &SE3Pose,
    mesh: &GroundMesh,
    stride: usize,
    source: FrameSource,
) -> Result<RaycastResult> {
    if stride == 0 {
        return Err(Error::InvalidGeometry("stride must be at least 1".into()));
    }
    if image.width() != camera.width || image.height() != camera.height {
        return Err(Error::InvalidGeometry(format!(
            "image is {}x{}, camera expects {}x{}",
            image.width(),
            image.height(),
            camera.width,
            camera.height
        )));
    }
    let index = MeshIndex::new(mesh);
    let city_from_cam = camera.city_from_camera(ego);
    let origin = city_from_cam.translation();
    let rows: Vec<usize> = (0..camera.height).step_by(stride).collect();
    let cols = camera.width.div_ceil(stride);
    let per_row: Vec<Vec<ColoredGroundPoint>> = rows
        .par_iter()
        .map(|&v| {
            let mut out = Vec::new();
            for u in (0..camera.width).step_by(stride) {
                let dir = city_from_cam.rotate(camera.pixel_ray(u as f64 + 0.5, v as f64 + 0.5));
                let Ok(ray) = Ray3::towards(origin, dir) else {
                    continue;
                };
                if let Some((_, hit)) = index.nearest_hit(&ray) {
                    out.push(ColoredGroundPoint {
                        position: ray.at(hit.distance),
                        color: image.get(u, v),
                        camera_id: source.camera_id,
                        timestamp_ns: source.timestamp_ns,
                    });
                }
            }
            out
        })
        .collect();
    Ok(RaycastResult {
        points: per_row.into_iter().flatten().collect(),
        rays_cast: (rows.len() * cols) as u64,
    })
}
