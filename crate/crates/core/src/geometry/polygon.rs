use super::polyline::point_to_segment_distance;
use super::{Point2, Polyline3};
use crate::error::{Error, Result};

const AREA_EPS: f64 = 1e-12;
/// Points closer than this to a polygon edge count as on the boundary.
const BOUNDARY_EPS: f64 = 1e-9;

/// Simple polygon with nonzero area, implicitly closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    vertices: Vec<Point2>,
}

impl Polygon2 {
    /// Validates and stores the polygon. Consecutive duplicate vertices
    /// (including a repeated closing vertex) are dropped first.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let mut v: Vec<Point2> = Vec::with_capacity(vertices.len());
        for p in vertices {
            if !p.is_finite() {
                return Err(Error::InvalidGeometry(format!("non-finite polygon vertex {p:?}")));
            }
            if v.last().is_none_or(|q| q.distance(p) > BOUNDARY_EPS) {
                v.push(p);
            }
        }
        while v.len() > 1 && v[0].distance(v[v.len() - 1]) <= BOUNDARY_EPS {
            v.pop();
        }
        if v.len() < 3 {
            return Err(Error::InvalidGeometry(format!(
                "polygon needs at least 3 distinct vertices, got {}",
                v.len()
            )));
        }
        let poly = Polygon2 { vertices: v };
        if poly.area() <= AREA_EPS {
            return Err(Error::InvalidGeometry("polygon has zero area".into()));
        }
        if let Some((i, j)) = poly.first_self_intersection() {
            return Err(Error::InvalidGeometry(format!(
                "polygon edges {i} and {j} intersect"
            )));
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Signed shoelace area (positive when counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let sign = self.signed_area().signum();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            (b - a).cross(c - b) * sign >= -AREA_EPS
        })
    }

    pub fn bbox(&self) -> Aabb2 {
        Aabb2::from_points(self.vertices.iter().copied())
    }

    /// Counter-clockwise copy of the vertex list.
    pub fn ccw_vertices(&self) -> Vec<Point2> {
        let mut v = self.vertices.clone();
        if self.signed_area() < 0.0 {
            v.reverse();
        }
        v
    }

    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| point_to_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Inside or on the boundary.
    pub fn contains(&self, p: Point2) -> bool {
        self.contains_strict(p) || self.boundary_distance(p) <= BOUNDARY_EPS
    }

    /// Even-odd crossing test; boundary points may fall either way.
    pub(crate) fn contains_strict(&self, p: Point2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn centroid(&self) -> Point2 {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (a, b) in self.edges() {
            let c = a.cross(b);
            cx += (a.x + b.x) * c;
            cy += (a.y + b.y) * c;
        }
        let k = 1.0 / (6.0 * self.signed_area());
        Point2::new(cx * k, cy * k)
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let edge = |i: usize| (self.vertices[i], self.vertices[(i + 1) % n]);
        for i in 0..n {
            let (a, b) = edge(i);
            // adjacent edge folding back onto this one
            let (_, c) = edge((i + 1) % n);
            if (b - a).cross(c - b).abs() <= AREA_EPS && (b - a).dot(c - b) < 0.0 {
                return Some((i, (i + 1) % n));
            }
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = edge(j);
                if segments_intersect(a, b, c, d) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x) - BOUNDARY_EPS
        && p.x <= a.x.max(b.x) + BOUNDARY_EPS
        && p.y >= a.y.min(b.y) - BOUNDARY_EPS
        && p.y <= a.y.max(b.y) + BOUNDARY_EPS
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb2 {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb2 {
    pub fn around(center: Point2, half_extent: f64) -> Self {
        Aabb2 {
            min: Point2::new(center.x - half_extent, center.y - half_extent),
            max: Point2::new(center.x + half_extent, center.y + half_extent),
        }
    }

    pub fn from_points(points: impl IntoIterator<Item = Point2>) -> Self {
        let mut b = Aabb2 {
            min: Point2::new(f64::INFINITY, f64::INFINITY),
            max: Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in points {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        b
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn overlaps(&self, o: &Aabb2) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    /// Liang–Barsky test of the closed segment against the closed box.
    pub fn intersects_segment(&self, a: Point2, b: Point2) -> bool {
        let d = b - a;
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (p, q) in [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }

    pub fn intersects_polyline(&self, line: &Polyline3) -> bool {
        line.points()
            .windows(2)
            .any(|w| self.intersects_segment(w[0].xy(), w[1].xy()))
    }

    /// True if the box and the closed polygon region share any point.
    pub fn intersects_polygon(&self, poly: &Polygon2) -> bool {
        if !self.overlaps(&poly.bbox()) {
            return false;
        }
        poly.edges().any(|(a, b)| self.intersects_segment(a, b))
            || poly.contains(Point2::new(
                0.5 * (self.min.x + self.max.x),
                0.5 * (self.min.y + self.max.y),
            ))
    }
}

/// 0 inside (or on the boundary), else the distance to the boundary.
pub fn point_to_polygon_distance(p: Point2, poly: &Polygon2) -> f64 {
    if poly.contains_strict(p) {
        0.0
    } else {
        poly.boundary_distance(p)
    }
}

/// Ear-clipping triangulation. Triangles are counter-clockwise.
pub fn triangulate(poly: &Polygon2) -> Vec<[Point2; 3]> {
    let mut v = poly.ccw_vertices();
    let mut out = Vec::with_capacity(v.len().saturating_sub(2));
    // drop collinear vertices; they never form a valid ear
    v = {
        let n = v.len();
        let kept: Vec<Point2> = (0..n)
            .filter(|&i| orient(v[(i + n - 1) % n], v[i], v[(i + 1) % n]).abs() > AREA_EPS)
            .map(|i| v[i])
            .collect();
        if kept.len() >= 3 {
            kept
        } else {
            v
        }
    };
    while v.len() > 3 {
        let n = v.len();
        let mut best: Option<usize> = None;
        for i in 0..n {
            let (a, b, c) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            if orient(a, b, c) <= AREA_EPS {
                continue;
            }
            let blocked = (0..n).any(|j| {
                if j == i || j == (i + n - 1) % n || j == (i + 1) % n {
                    return false;
                }
                let p = v[j];
                orient(a, b, p) >= 0.0 && orient(b, c, p) >= 0.0 && orient(c, a, p) >= 0.0
            });
            if !blocked {
                best = Some(i);
                break;
            }
        }
        // Numerical trouble: clip the most convex vertex rather than loop.
        let i = best.unwrap_or_else(|| {
            (0..n)
                .max_by(|&x, &y| {
                    let ox = orient(v[(x + n - 1) % n], v[x], v[(x + 1) % n]);
                    let oy = orient(v[(y + n - 1) % n], v[y], v[(y + 1) % n]);
                    ox.total_cmp(&oy)
                })
                .unwrap()
        });
        out.push([v[(i + n - 1) % n], v[i], v[(i + 1) % n]]);
        v.remove(i);
    }
    out.push([v[0], v[1], v[2]]);
    out
}

fn shoelace(v: &[Point2]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

/// Clips `subject` against the counter-clockwise convex polygon `clip`.
fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut out);
        let m = input.len();
        for j in 0..m {
            let prev = input[(j + m - 1) % m];
            let cur = input[j];
            let dp = orient(a, b, prev);
            let dc = orient(a, b, cur);
            if (dp >= 0.0) != (dc >= 0.0) {
                out.push(prev.lerp(cur, dp / (dp - dc)));
            }
            if dc >= 0.0 {
                out.push(cur);
            }
        }
    }
    out
}

fn intersection_area(a: &Polygon2, b: &Polygon2) -> f64 {
    if !a.bbox().overlaps(&b.bbox()) {
        return 0.0;
    }
    if a.is_convex() && b.is_convex() {
        return shoelace(&clip_convex(&a.ccw_vertices(), &b.ccw_vertices())).abs();
    }
    // Triangulations partition each polygon, so the pairwise triangle
    // overlaps sum to the full intersection area.
    let ta = triangulate(a);
    let tb = triangulate(b);
    let mut area = 0.0;
    for s in &ta {
        let sb = Aabb2::from_points(s.iter().copied());
        for c in &tb {
            if !sb.overlaps(&Aabb2::from_points(c.iter().copied())) {
                continue;
            }
            area += shoelace(&clip_convex(s, c)).abs();
        }
    }
    area
}

/// Intersection over union of two simple polygons, in [0, 1].
pub fn polygon_iou(a: &Polygon2, b: &Polygon2) -> f64 {
    let inter = intersection_area(a, b);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
