use crate::error::{Error, Result};
use crate::geometry::{Aabb2, Point2};

/// Default ground raster resolution, meters.
pub const DEFAULT_GROUND_RESOLUTION: f64 = 0.3;

/// Row-major raster of ground heights.
///
/// Sample `(col, row)` sits at `origin + (col, row) * resolution`, i.e.
/// `origin` is the center of the first cell and rows advance along +y.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundHeightGrid {
    pub origin: Point2,
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub heights: Vec<f32>,
}

impl GroundHeightGrid {
    pub fn new(origin: Point2, resolution: f64, width: usize, height: usize, heights: Vec<f32>) -> Result<Self> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::validation("ground", format!("resolution must be positive, got {resolution}")));
        }
        if width == 0 || height == 0 || heights.len() != width * height {
            return Err(Error::validation(
                "ground",
                format!("{width}x{height} grid does not match {} height values", heights.len()),
            ));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::validation("ground", "non-finite height value"));
        }
        Ok(GroundHeightGrid { origin, resolution, width, height, heights })
    }

    pub fn flat(origin: Point2, resolution: f64, width: usize, height: usize, value: f32) -> Result<Self> {
        GroundHeightGrid::new(origin, resolution, width, height, vec![value; width * height])
    }

    /// Samples `f(x, y)` at every cell center.
    pub fn from_fn(
        origin: Point2,
        resolution: f64,
        width: usize,
        height: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut heights = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                let p = self::cell_center(origin, resolution, col, row);
                heights.push(f(p.x, p.y) as f32);
            }
        }
        GroundHeightGrid::new(origin, resolution, width, height, heights)
    }

    /// Grid covering `bounds` (plus one cell of margin) with constant height.
    pub fn covering(bounds: Aabb2, resolution: f64, value: f32) -> Result<Self> {
        let origin = Point2::new(bounds.min.x - resolution, bounds.min.y - resolution);
        let width = ((bounds.max.x - origin.x) / resolution).ceil() as usize + 2;
        let height = ((bounds.max.y - origin.y) / resolution).ceil() as usize + 2;
        GroundHeightGrid::flat(origin, resolution, width, height, value)
    }

    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.heights[row * self.width + col] as f64
    }

    pub fn extent(&self) -> Aabb2 {
        Aabb2 {
            min: self.origin,
            max: cell_center(self.origin, self.resolution, self.width - 1, self.height - 1),
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        let e = self.extent();
        let tol = 1e-9 * self.resolution;
        p.x >= e.min.x - tol && p.x <= e.max.x + tol && p.y >= e.min.y - tol && p.y <= e.max.y + tol
    }

    /// Bilinear interpolation between the four surrounding samples.
    pub fn height_at(&self, p: Point2) -> Result<f64> {
        if !p.is_finite() || !self.contains(p) {
            return Err(Error::OutsideGrid { x: p.x, y: p.y });
        }
        Ok(self.interpolate(p))
    }

    /// Like [`height_at`](Self::height_at) but clamps to the grid edge.
    pub fn height_at_clamped(&self, p: Point2) -> f64 {
        let e = self.extent();
        self.interpolate(Point2::new(p.x.clamp(e.min.x, e.max.x), p.y.clamp(e.min.y, e.max.y)))
    }

    fn interpolate(&self, p: Point2) -> f64 {
        let fx = ((p.x - self.origin.x) / self.resolution).clamp(0.0, (self.width - 1) as f64);
        let fy = ((p.y - self.origin.y) / self.resolution).clamp(0.0, (self.height - 1) as f64);
        let c0 = (fx.floor() as usize).min(self.width.saturating_sub(2));
        let r0 = (fy.floor() as usize).min(self.height.saturating_sub(2));
        let c1 = (c0 + 1).min(self.width - 1);
        let r1 = (r0 + 1).min(self.height - 1);
        let tx = fx - c0 as f64;
        let ty = fy - r0 as f64;
        let bottom = self.value(c0, r0) * (1.0 - tx) + self.value(c1, r0) * tx;
        let top = self.value(c0, r1) * (1.0 - tx) + self.value(c1, r1) * tx;
        bottom * (1.0 - ty) + top * ty
    }
}

fn cell_center(origin: Point2, resolution: f64, col: usize, row: usize) -> Point2 {
    Point2::new(origin.x + col as f64 * resolution, origin.y + row as f64 * resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_grid() {
        let g = GroundHeightGrid::flat(Point2::new(-3.0, -3.0), 0.3, 21, 21, 2.0).unwrap();
        for p in [(-3.0, -3.0), (0.0, 0.0), (1.234, -0.5), (3.0, 3.0)] {
            assert_eq!(g.height_at(Point2::new(p.0, p.1)).unwrap(), 2.0);
        }
    }

    #[test]
    fn cell_center_returns_cell_value() {
        let g = GroundHeightGrid::new(Point2::new(0.0, 0.0), 0.5, 3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(g.height_at(Point2::new(0.5, 0.5)).unwrap(), 5.0);
        assert_eq!(g.height_at(Point2::new(1.0, 0.0)).unwrap(), 3.0);
    }

    #[test]
    fn ramp_is_recovered_exactly() {
        // Heights are f32, so pick a plane whose samples are exactly representable.
        let g = GroundHeightGrid::from_fn(Point2::new(0.0, 0.0), 0.25, 41, 41, |x, y| 0.5 * x - 0.25 * y + 1.0).unwrap();
        for p in [(1.125, 2.375), (3.3125, 0.0625), (9.9375, 9.8125)] {
            let h = g.height_at(Point2::new(p.0, p.1)).unwrap();
            assert!((h - (0.5 * p.0 - 0.25 * p.1 + 1.0)).abs() < 1e-12, "{p:?} -> {h}");
        }
    }

    #[test]
    fn outside_is_an_error() {
        let g = GroundHeightGrid::flat(Point2::new(0.0, 0.0), 1.0, 4, 4, 0.0).unwrap();
        assert!(matches!(g.height_at(Point2::new(3.5, 1.0)), Err(Error::OutsideGrid { .. })));
        assert!(g.height_at(Point2::new(-0.1, 1.0)).is_err());
    }

    #[test]
    fn validates_dimensions() {
        assert!(GroundHeightGrid::new(Point2::default(), 0.3, 2, 2, vec![0.0; 3]).is_err());
        assert!(GroundHeightGrid::new(Point2::default(), 0.0, 1, 1, vec![0.0]).is_err());
    }
}
