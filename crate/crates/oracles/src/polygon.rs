//! Polygon area and overlap references.

use crate::rng::SplitMix64;

pub fn shoelace_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        twice += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * twice
}

fn ccw(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut v = poly.to_vec();
    if shoelace_area(&v) < 0.0 {
        v.reverse();
    }
    v
}

/// Sutherland–Hodgman: clip `subject` against the convex polygon `clip`.
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let clip = ccw(clip);
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let inside = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let cur_in = inside(cur);
            let prev_in = inside(prev);
            if cur_in != prev_in {
                // intersection of prev->cur with line a->b
                let d1 = (b[0] - a[0]) * (prev[1] - a[1]) - (b[1] - a[1]) * (prev[0] - a[0]);
                let d2 = (b[0] - a[0]) * (cur[1] - a[1]) - (b[1] - a[1]) * (cur[0] - a[0]);
                let t = d1 / (d1 - d2);
                output.push([prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])]);
            }
            if cur_in {
                output.push(cur);
            }
        }
    }
    output
}

/// IoU of two convex polygons by direct clipping.
pub fn convex_iou(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let inter = shoelace_area(&clip_convex(&ccw(a), b)).abs();
    let union = shoelace_area(a).abs() + shoelace_area(b).abs() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Even-odd crossing test. Points exactly on the boundary may go either way.
pub fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Monte Carlo IoU over the joint bounding box. Returns `(estimate, sigma)`
/// where sigma is the binomial standard error of the estimate.
pub fn monte_carlo_iou(a: &[[f64; 2]], b: &[[f64; 2]], samples: u64, seed: u64) -> (f64, f64) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in a.iter().chain(b) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut rng = SplitMix64::new(seed);
    let (mut both, mut either) = (0u64, 0u64);
    for _ in 0..samples {
        let p = [rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1])];
        let (ia, ib) = (point_in_polygon(p, a), point_in_polygon(p, b));
        if ia && ib {
            both += 1;
        }
        if ia || ib {
            either += 1;
        }
    }
    if either == 0 {
        return (0.0, 0.0);
    }
    let iou = both as f64 / either as f64;
    (iou, (iou * (1.0 - iou) / either as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offset_unit_squares() {
        let a = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let b = [[0.5, 0.0], [1.5, 0.0], [1.5, 1.0], [0.5, 1.0]];
        assert!((convex_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        let (mc, sigma) = monte_carlo_iou(&a, &b, 200_000, 7);
        assert!((mc - 1.0 / 3.0).abs() < 4.0 * sigma);
    }
}
