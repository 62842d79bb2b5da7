use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3, SE3Pose, Triangle3};
use crate::map::GroundHeightGrid;
use crate::render::CameraModel;

/// Ground mesh edge length in meters.
pub const MESH_RESOLUTION: f64 = 1.0;
/// Rays are cast against ground within this ℓ∞ radius of the ego.
pub const MESH_RADIUS: f64 = 25.0;

/// Triangulated ground patch, two triangles per 1 m quad.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMesh {
    pub triangles: Vec<Triangle3>,
    pub center: Point2,
    pub radius: f64,
}

/// Tessellates the ground within ℓ∞ `radius` of `center`. Quad (i, j) is
/// split along its (i, j)–(i+1, j+1) diagonal; vertex heights come from the
/// grid, and shared vertices are the same values.
pub fn tessellate_ground(grid: &GroundHeightGrid, center: Point2, radius: f64) -> Result<GroundMesh> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidGeometry(format!("mesh radius {radius}")));
    }
    let n = (2.0 * radius / MESH_RESOLUTION).round().max(1.0) as usize;
    let x0 = center.x - radius;
    let y0 = center.y - radius;
    let mut verts = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let p = Point2::new(x0 + i as f64 * MESH_RESOLUTION, y0 + j as f64 * MESH_RESOLUTION);
            verts.push(p.with_z(grid.height_at(p)?));
        }
    }
    let v = |i: usize, j: usize| verts[j * (n + 1) + i];
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push(Triangle3::new(v(i, j), v(i + 1, j), v(i + 1, j + 1))?);
            triangles.push(Triangle3::new(v(i, j), v(i + 1, j + 1), v(i, j + 1))?);
        }
    }
    Ok(GroundMesh { triangles, center, radius })
}

/// Drops triangles entirely outside the left or the right cutting plane of
/// the camera's view frustum. Triangles touching the wedge are kept.
pub fn cull_frustum(mesh: &GroundMesh, camera: &CameraModel, ego: &SE3Pose) -> GroundMesh {
    let cam_from_city = camera.camera_from_city(ego);
    // inward normals in the camera frame; both planes contain the optical center
    let left = Point3::new(1.0, 0.0, camera.cx / camera.fx);
    let right = Point3::new(-1.0, 0.0, (camera.width as f64 - camera.cx) / camera.fx);
    let triangles = mesh
        .triangles
        .iter()
        .filter(|t| {
            let v = t.vertices().map(|p| cam_from_city.transform_point(p));
            let outside = |n: Point3| v.iter().all(|p| n.dot(*p) < 0.0);
            !outside(left) && !outside(right)
        })
        .copied()
        .collect();
    GroundMesh {
        triangles,
        center: mesh.center,
        radius: mesh.radius,
    }
}
