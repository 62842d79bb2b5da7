//! Ray/triangle intersection the long way round: intersect the supporting
//! plane, then check which side of each edge the hit point falls on.

use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleHit {
    pub distance: f64,
    pub point: [f64; 3],
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Returns the hit if the ray meets the closed triangle at positive distance.
///
/// `edge_slack` is the tolerance on the edge-side tests, expressed relative
/// to the squared plane-normal magnitude.
pub fn ray_triangle(
    origin: [f64; 3],
    direction: [f64; 3],
    tri: [[f64; 3]; 3],
    edge_slack: f64,
) -> Option<OracleHit> {
    let normal = cross(sub(tri[1], tri[0]), sub(tri[2], tri[0]));
    let nn = dot(normal, normal);
    if nn == 0.0 {
        return None;
    }
    let denom = dot(normal, direction);
    if denom.abs() <= 1e-12 * nn.sqrt() {
        return None;
    }
    let distance = dot(normal, sub(tri[0], origin)) / denom;
    if distance <= 0.0 {
        return None;
    }
    let point = [
        origin[0] + distance * direction[0],
        origin[1] + distance * direction[1],
        origin[2] + distance * direction[2],
    ];
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let side = dot(cross(sub(b, a), sub(point, a)), normal);
        if side < -edge_slack * nn {
            return None;
        }
    }
    Some(OracleHit { distance, point })
}

/// One randomized ray/triangle query.
#[derive(Debug, Clone, Copy)]
pub struct RayCase {
    pub origin: [f64; 3],
    pub direction: [f64; 3],
    pub tri: [[f64; 3]; 3],
}

/// Triangle with vertices in a 20 m cube, ray from a random origin. Two
/// thirds of the rays are aimed at a point with barycentric coordinates in
/// [-0.15, 1] so hits and near misses are both common; the rest point in
/// a random direction.
pub fn random_case(rng: &mut SplitMix64) -> RayCase {
    fn pt(rng: &mut SplitMix64, s: f64) -> [f64; 3] {
        [rng.uniform(-s, s), rng.uniform(-s, s), rng.uniform(-s, s)]
    }
    let tri = [pt(rng, 10.0), pt(rng, 10.0), pt(rng, 10.0)];
    let origin = pt(rng, 30.0);
    let direction = if rng.next_u64().is_multiple_of(3) {
        pt(rng, 1.0)
    } else {
        let a = rng.uniform(-0.15, 1.0);
        let b = rng.uniform(-0.15, 1.0);
        let target: Vec<f64> = (0..3)
            .map(|k| tri[0][k] + a * (tri[1][k] - tri[0][k]) + b * (tri[2][k] - tri[0][k]))
            .collect();
        [target[0] - origin[0], target[1] - origin[1], target[2] - origin[2]]
    };
    RayCase { origin, direction, tri }
}
