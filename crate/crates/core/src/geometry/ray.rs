use super::Point3;
use crate::error::{Error, Result};

/// Inclusive slack on barycentric bounds so rays through shared mesh
/// edges hit at least one of the adjacent triangles.
const BARYCENTRIC_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray3 {
    pub origin: Point3,
    pub direction: Point3,
}

impl Ray3 {
    pub fn new(origin: Point3, direction: Point3) -> Result<Self> {
        if !origin.is_finite() || (direction.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidGeometry(format!(
                "ray direction must be unit length, got {direction:?}"
            )));
        }
        Ok(Ray3 { origin, direction })
    }

    pub fn towards(origin: Point3, direction: Point3) -> Result<Self> {
        let d = direction
            .normalized()
            .ok_or_else(|| Error::InvalidGeometry("zero ray direction".into()))?;
        Ray3::new(origin, d)
    }

    pub fn at(&self, s: f64) -> Point3 {
        self.origin + self.direction * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle3 {
    pub v0: Point3,
    pub v1: Point3,
    pub v2: Point3,
}

impl Triangle3 {
    pub fn new(v0: Point3, v1: Point3, v2: Point3) -> Result<Self> {
        let t = Triangle3 { v0, v1, v2 };
        if !(v0.is_finite() && v1.is_finite() && v2.is_finite()) || t.area() <= 1e-12 {
            return Err(Error::InvalidGeometry("degenerate triangle".into()));
        }
        Ok(t)
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.v1 - self.v0).cross(self.v2 - self.v0).norm()
    }

    pub fn vertices(&self) -> [Point3; 3] {
        [self.v0, self.v1, self.v2]
    }
}

/// Ray parameter and barycentric coordinates of a hit; the hit point is
/// `v0 + u (v1 - v0) + v (v2 - v0)` = `origin + distance * direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub u: f64,
    pub v: f64,
}

/// Möller–Trumbore ray/triangle intersection.
pub fn ray_triangle_intersect(ray: &Ray3, tri: &Triangle3) -> Option<Hit> {
    let e1 = tri.v1 - tri.v0;
    let e2 = tri.v2 - tri.v0;
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det.abs() <= 1e-12 * e1.norm() * e2.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let t = ray.origin - tri.v0;
    let u = t.dot(p) * inv;
    if !(-BARYCENTRIC_SLACK..=1.0 + BARYCENTRIC_SLACK).contains(&u) {
        return None;
    }
    let q = t.cross(e1);
    let v = ray.direction.dot(q) * inv;
    if v < -BARYCENTRIC_SLACK || u + v > 1.0 + BARYCENTRIC_SLACK {
        return None;
    }
    let distance = e2.dot(q) * inv;
    (distance > 0.0).then_some(Hit { distance, u, v })
}
