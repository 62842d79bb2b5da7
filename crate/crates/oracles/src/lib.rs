//! Brute-force reference implementations.
//!
//! Nothing in here touches `mapforge` types or kernels. Everything works on
//! plain `[f64; N]` arrays so that a bug in the production geometry cannot
//! leak into the values it is checked against.

pub mod camera;
pub mod integrate;
pub mod polygon;
pub mod ray;
pub mod rng;

pub use camera::PinholeOracle;
pub use integrate::clipped_normal_mean;
pub use polygon::{convex_iou, monte_carlo_iou, point_in_polygon, shoelace_area};
pub use ray::{random_case, ray_triangle, OracleHit, RayCase};
