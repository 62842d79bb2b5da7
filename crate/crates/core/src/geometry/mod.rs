//! Planar and spatial primitives shared by every other module.
//!
//! All coordinates are meters in the city frame unless stated otherwise.
//! Polyline distances, normals and polygon operations work on the 2D
//! projection (z dropped).

mod point;
mod polygon;
mod polyline;
mod pose;
mod ray;

pub use point::{linf_distance, Point2, Point3};
pub use polygon::{polygon_iou, triangulate, Aabb2, Polygon2};
pub use polyline::{
    interpolate_polyline, normal_at_waypoint, point_to_polyline_distance, point_to_segment_distance, waypoint_tangent,
    Polyline3,
};
pub use pose::SE3Pose;
pub use ray::{ray_triangle_intersect, Hit, Ray3, Triangle3};

pub use polygon::point_to_polygon_distance;
