use super::{Point2, Point3};
use crate::error::{Error, Result};

/// Minimum separation between consecutive polyline vertices.
const MIN_VERTEX_GAP: f64 = 1e-9;

/// Ordered 3D polyline with at least two distinct consecutive points.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline3 {
    points: Vec<Point3>,
}

impl Polyline3 {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite polyline vertex {p:?}")));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0].distance(w[1]) <= MIN_VERTEX_GAP {
                return Err(Error::InvalidGeometry(format!(
                    "polyline vertices {i} and {} coincide",
                    i + 1
                )));
            }
        }
        Ok(Polyline3 { points })
    }

    /// Builds a polyline after dropping consecutive duplicates.
    pub fn from_points_dedup(points: impl IntoIterator<Item = Point3>) -> Result<Self> {
        let mut out: Vec<Point3> = Vec::new();
        for p in points {
            if out.last().is_none_or(|q| q.distance(p) > MIN_VERTEX_GAP) {
                out.push(p);
            }
        }
        Polyline3::new(out)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point3> {
        self.points
    }

    pub fn first(&self) -> Point3 {
        self.points[0]
    }

    pub fn last(&self) -> Point3 {
        self.points[self.points.len() - 1]
    }

    pub fn xy(&self) -> Vec<Point2> {
        self.points.iter().map(|p| p.xy()).collect()
    }

    /// 3D arc length.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    pub fn reversed(&self) -> Polyline3 {
        let mut points = self.points.clone();
        points.reverse();
        Polyline3 { points }
    }

    /// Resamples to `n` points equally spaced by arc length.
    pub fn resample(&self, n: usize) -> Result<Polyline3> {
        Polyline3::new(interpolate_polyline(self, n)?)
    }

    /// Translates every vertex by `offset` meters along the 2D left normal
    /// of its local direction. Used for parallel paint lines.
    pub fn offset_left(&self, offset: f64) -> Polyline3 {
        let n = self.points.len();
        let pts = (0..n)
            .map(|i| {
                let a = self.points[i.saturating_sub(1)].xy();
                let b = self.points[(i + 1).min(n - 1)].xy();
                let normal = (b - a).normalized().map(Point2::perp).unwrap_or_default();
                let p = self.points[i];
                Point3::new(p.x + normal.x * offset, p.y + normal.y * offset, p.z)
            })
            .collect();
        Polyline3 { points: pts }
    }

    /// Portion of the polyline between arc lengths `s0 < s1` (3D).
    pub fn slice(&self, s0: f64, s1: f64) -> Option<Polyline3> {
        let mut out: Vec<Point3> = Vec::new();
        let mut acc = 0.0;
        for w in self.points.windows(2) {
            let len = w[0].distance(w[1]);
            let (a, b) = (acc, acc + len);
            if b >= s0 && a <= s1 {
                let t0 = ((s0 - a) / len).clamp(0.0, 1.0);
                let t1 = ((s1 - a) / len).clamp(0.0, 1.0);
                for p in [w[0].lerp(w[1], t0), w[0].lerp(w[1], t1)] {
                    if out.last().is_none_or(|q| q.distance(p) > MIN_VERTEX_GAP) {
                        out.push(p);
                    }
                }
            }
            acc = b;
        }
        Polyline3::new(out).ok()
    }

    /// Splits into dashes of length `on` separated by gaps of `off`,
    /// measured along the 3D arc length and starting with a dash.
    pub fn dashes(&self, on: f64, off: f64) -> Vec<Polyline3> {
        let total = self.length();
        let mut out = Vec::new();
        let mut start = 0.0;
        while start < total {
            if let Some(d) = self.slice(start, (start + on).min(total)) {
                out.push(d);
            }
            start += on + off;
        }
        out
    }
}

/// `n` points equally spaced by 3D arc length; first and last coincide
/// with the polyline endpoints.
pub fn interpolate_polyline(line: &Polyline3, n: usize) -> Result<Vec<Point3>> {
    if n < 2 {
        return Err(Error::InvalidGeometry(format!("need at least 2 waypoints, got {n}")));
    }
    let pts = line.points();
    let mut cumulative = Vec::with_capacity(pts.len());
    cumulative.push(0.0);
    for w in pts.windows(2) {
        cumulative.push(cumulative.last().unwrap() + w[0].distance(w[1]));
    }
    let total = *cumulative.last().unwrap();
    if !(total > 0.0) {
        return Err(Error::DegeneratePolyline);
    }

    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        if k == 0 {
            out.push(pts[0]);
            continue;
        }
        if k == n - 1 {
            out.push(pts[pts.len() - 1]);
            continue;
        }
        let target = total * k as f64 / (n - 1) as f64;
        while seg + 2 < cumulative.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let t = ((target - cumulative[seg]) / len).clamp(0.0, 1.0);
        out.push(pts[seg].lerp(pts[seg + 1], t));
    }
    Ok(out)
}

/// Unit 2D tangent at `index` by central difference, one-sided at the ends.
pub fn waypoint_tangent(waypoints: &[Point3], index: usize) -> Result<Point2> {
    let n = waypoints.len();
    if index >= n || n < 2 {
        return Err(Error::InvalidGeometry(format!(
            "waypoint index {index} out of range for {n} waypoints"
        )));
    }
    let a = waypoints[index.saturating_sub(1)].xy();
    let b = waypoints[(index + 1).min(n - 1)].xy();
    (b - a).normalized().ok_or(Error::DegenerateTangent(index))
}

/// Unit normal pointing to the left of the direction of travel at one of
/// the `n` arc-length waypoints of `line`.
pub fn normal_at_waypoint(line: &Polyline3, waypoint_index: usize, n: usize) -> Result<Point2> {
    let waypoints = interpolate_polyline(line, n)?;
    Ok(waypoint_tangent(&waypoints, waypoint_index)?.perp())
}

pub fn point_to_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (p - a).dot(ab) / len2;
    if t <= 0.0 {
        p.distance(a)
    } else if t >= 1.0 {
        p.distance(b)
    } else {
        (p - a).cross(ab).abs() / len2.sqrt()
    }
}

/// Minimum distance from `p` to the 2D projection of `line`.
pub fn point_to_polyline_distance(p: Point2, line: &Polyline3) -> f64 {
    line.points()
        .windows(2)
        .map(|w| point_to_segment_distance(p, w[0].xy(), w[1].xy()))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pts: &[[f64; 3]]) -> Polyline3 {
        Polyline3::new(pts.iter().map(|&p| p.into()).collect()).unwrap()
    }

    #[test]
    fn interpolate_examples() {
        let l = line(&[[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        assert_eq!(
            interpolate_polyline(&l, 2).unwrap(),
            vec![Point3::new(0.0, 0.0, 0.0), Point3::new(10.0, 0.0, 0.0)]
        );
        let xs: Vec<f64> = interpolate_polyline(&l, 5).unwrap().iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![0.0, 2.5, 5.0, 7.5, 10.0]);

        let ell = line(&[[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [4.0, 4.0, 0.0]]);
        let w = interpolate_polyline(&ell, 3).unwrap();
        assert!(w[1].distance(Point3::new(4.0, 0.0, 0.0)) < 1e-12);
    }

    #[test]
    fn interpolate_rejects_small_n() {
        let l = line(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert!(interpolate_polyline(&l, 1).is_err());
    }

    #[test]
    fn polyline_rejects_duplicates_and_short() {
        assert!(Polyline3::new(vec![Point3::default()]).is_err());
        assert!(Polyline3::new(vec![Point3::default(), Point3::default()]).is_err());
        assert!(Polyline3::new(vec![Point3::default(), Point3::new(f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn normals_of_straight_lines() {
        let px = line(&[[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        for i in 0..5 {
            let n = normal_at_waypoint(&px, i, 5).unwrap();
            assert!((n.x - 0.0).abs() < 1e-12 && (n.y - 1.0).abs() < 1e-12);
        }
        let py = line(&[[0.0, 0.0, 0.0], [0.0, 10.0, 0.0]]);
        let n = normal_at_waypoint(&py, 2, 5).unwrap();
        assert!((n.x + 1.0).abs() < 1e-12 && n.y.abs() < 1e-12);
    }

    #[test]
    fn normal_on_quarter_circle() {
        // Right-turning arc from (0,0) to (R,R) around (R,0); at its 45°
        // midpoint the travel direction is (1,1)/√2 and the left normal is
        // the outward radius (-1,1)/√2.
        let r = 10.0;
        let pts: Vec<Point3> = (0..=400)
            .map(|i| {
                let theta = std::f64::consts::PI - std::f64::consts::FRAC_PI_2 * i as f64 / 400.0;
                Point3::new(r + r * theta.cos(), r * theta.sin(), 0.0)
            })
            .collect();
        let arc = Polyline3::new(pts).unwrap();
        let n = normal_at_waypoint(&arc, 25, 51).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n.x + h).abs() < 1e-3 && (n.y - h).abs() < 1e-3, "{n:?}");
    }

    #[test]
    fn polyline_distance_examples() {
        let seg = line(&[[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
        assert_eq!(point_to_polyline_distance(Point2::new(0.3, 0.0), &seg), 0.0);
        assert_eq!(point_to_polyline_distance(Point2::new(0.0, 1.0), &seg), 1.0);
        assert!((point_to_polyline_distance(Point2::new(2.0, 1.0), &seg) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dash_pattern_lengths() {
        let l = line(&[[0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [10.0, 0.0, 0.0]]);
        let dashes = l.dashes(1.5, 1.0);
        // dashes on [0,1.5], [2.5,4], [5,6.5], [7.5,9]
        assert_eq!(dashes.len(), 4);
        let expect = [(0.0, 1.5), (2.5, 4.0), (5.0, 6.5), (7.5, 9.0)];
        for (d, (a, b)) in dashes.iter().zip(expect) {
            assert!((d.first().x - a).abs() < 1e-9 && (d.last().x - b).abs() < 1e-9, "{d:?}");
        }
    }

    #[test]
    fn offset_straight_line() {
        let l = line(&[[0.0, 0.0, 0.0], [5.0, 0.0, 1.0]]);
        let o = l.offset_left(0.1);
        assert!(o.points().iter().all(|p| (p.y - 0.1).abs() < 1e-12));
    }
}
