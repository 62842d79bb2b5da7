//! Pixel-space fill primitives. Pixel (c, r) covers [c, c+1) × [r, r+1) and
//! is sampled at its center.

use crate::geometry::Point2;

/// Calls `f(col, row)` for every pixel whose center lies inside the
/// polygon under the even-odd rule. Centers exactly on a left or top edge
/// are inside, on a right or bottom edge outside.
pub fn scan_polygon(pts: &[[f64; 2]], width: usize, height: usize, mut f: impl FnMut(usize, usize)) {
    if pts.len() < 3 || width == 0 || height == 0 {
        return;
    }
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    if !(ymin.is_finite() && ymax.is_finite()) {
        return;
    }
    let r0 = (ymin - 0.5).ceil().max(0.0) as usize;
    let r1 = ((ymax - 0.5).ceil().min(height as f64)).max(0.0) as usize;
    let mut xs: Vec<f64> = Vec::with_capacity(8);
    for row in r0..r1 {
        let yc = row as f64 + 0.5;
        xs.clear();
        for i in 0..pts.len() {
            let a = pts[i];
            let b = pts[(i + 1) % pts.len()];
            if a[1] == b[1] {
                continue;
            }
            let (lo, hi) = if a[1] < b[1] { (a, b) } else { (b, a) };
            if yc >= lo[1] && yc < hi[1] {
                xs.push(lo[0] + (yc - lo[1]) * (hi[0] - lo[0]) / (hi[1] - lo[1]));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let c0 = (pair[0] - 0.5).ceil().max(0.0);
            let c1 = (pair[1] - 0.5).ceil().min(width as f64);
            if c1 <= c0 {
                continue;
            }
            for col in c0 as usize..c1 as usize {
                f(col, row);
            }
        }
    }
}

/// One rectangle per segment of `line`, `width` wide, extended by half the
/// width past both ends so consecutive segments join without gaps.
pub fn stroke_quads(line: &[Point2], width: f64) -> Vec<[Point2; 4]> {
    let h = 0.5 * width;
    line.windows(2)
        .filter_map(|w| {
            let d = (w[1] - w[0]).normalized()?;
            let n = d.perp() * h;
            let a = w[0] - d * h;
            let b = w[1] + d * h;
            Some([a + n, b + n, b - n, a - n])
        })
        .collect()
}
