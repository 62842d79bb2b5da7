//! Sensor orthoimagery: camera pixels are ray-cast onto a triangulated
//! ground mesh, aggregated over a ring buffer of sweeps and splatted into a
//! georeferenced top-down image.

mod mesh;
mod raycast;

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, SE3Pose};
use crate::render::{RasterImage, Rgb};

pub use mesh::{cull_frustum, tessellate_ground, GroundMesh, MESH_RADIUS, MESH_RESOLUTION};
pub use raycast::{raycast_frame, ColoredGroundPoint, FrameSource, MeshIndex, RaycastResult};

/// Sweeps held by the ring buffer; rendering waits until it is full.
pub const SWEEP_BUFFER_CAPACITY: usize = 10;
/// Holes up to this wide (meters) between lit pixels are interpolated.
pub const HOLE_FILL_DISTANCE: f64 = 0.25;
/// Minimum net ego displacement between two renders.
pub const RENDER_DISPLACEMENT: f64 = 5.0;

/// FIFO of per-sweep ground points, all cameras of a timestep merged.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRingBuffer {
    capacity: usize,
    entries: VecDeque<Vec<ColoredGroundPoint>>,
}

impl Default for SweepRingBuffer {
    fn default() -> Self {
        Self::new(SWEEP_BUFFER_CAPACITY)
    }
}

impl SweepRingBuffer {
    pub fn new(capacity: usize) -> Self {
        SweepRingBuffer {
            capacity: capacity.max(1),
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Appends a sweep, evicting the oldest beyond capacity.
    pub fn push(&mut self, sweep: Vec<ColoredGroundPoint>) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(sweep);
    }

    pub fn sweeps(&self) -> impl Iterator<Item = &[ColoredGroundPoint]> {
        self.entries.iter().map(|s| s.as_slice())
    }
}

pub fn accumulate(mut buffer: SweepRingBuffer, frame_points: Vec<ColoredGroundPoint>) -> SweepRingBuffer {
    buffer.push(frame_points);
    buffer
}

/// Top-down image of the buffered points before hole filling, with the
/// mask of pixels that received a point. On collisions the point with the
/// latest timestamp wins, ties broken by camera id and then buffer order.
pub fn splat(buffer: &SweepRingBuffer, ego: &SE3Pose, size: usize, resolution: f64) -> Result<(RasterImage, Vec<bool>)> {
    let mut img = RasterImage::centered(ego.translation().xy(), size, resolution)?;
    let geo = img.georef.expect("centered image is georeferenced");
    let mut winner: Vec<Option<(u64, u32, usize)>> = vec![None; size * size];
    let mut order = 0usize;
    for sweep in buffer.sweeps() {
        for p in sweep {
            let [c, r] = geo.to_pixel(p.position.xy());
            let (c, r) = (c.floor(), r.floor());
            order += 1;
            if c < 0.0 || r < 0.0 || c >= size as f64 || r >= size as f64 {
                continue;
            }
            let (c, r) = (c as usize, r as usize);
            let key = (p.timestamp_ns, p.camera_id, order);
            let slot = &mut winner[r * size + c];
            if slot.is_none_or(|k| key > k) {
                *slot = Some(key);
                img.set(c, r, p.color);
            }
        }
    }
    Ok((img, winner.iter().map(|w| w.is_some()).collect()))
}

/// Linear interpolation across unlit runs no longer than `max_gap` pixels
/// between two lit pixels: first along rows, then along columns. Returns the
/// number of pixels filled.
pub fn fill_holes(img: &mut RasterImage, lit: &mut [bool], max_gap: usize) -> usize {
    let (w, h) = (img.width(), img.height());
    let mut filled = 0;
    let mut pass = |img: &mut RasterImage, lit: &mut [bool], len: usize, lines: usize, at: &dyn Fn(usize, usize) -> (usize, usize)| {
        for line in 0..lines {
            let mut prev: Option<usize> = None;
            for k in 0..len {
                let (c, r) = at(line, k);
                if !lit[r * w + c] {
                    continue;
                }
                if let Some(p) = prev {
                    let gap = k - p;
                    if gap > 1 && gap <= max_gap {
                        let (pc, pr) = at(line, p);
                        let (a, b) = (img.get(pc, pr), img.get(c, r));
                        for m in p + 1..k {
                            let (mc, mr) = at(line, m);
                            img.set(mc, mr, a.lerp(b, (m - p) as f64 / gap as f64));
                            lit[mr * w + mc] = true;
                            filled += 1;
                        }
                    }
                }
                prev = Some(k);
            }
        }
    };
    pass(img, lit, w, h, &|line, k| (k, line));
    pass(img, lit, h, w, &|line, k| (line, k));
    filled
}

/// Sensor BEV from a full ring buffer: splat, then fill holes up to
/// 0.25 m wide. Farther holes stay black.
pub fn render_sensor_bev(buffer: &SweepRingBuffer, ego: &SE3Pose, size: usize, resolution: f64) -> Result<RasterImage> {
    if !buffer.is_full() {
        return Err(Error::BufferNotFull {
            have: buffer.len(),
            need: buffer.capacity(),
        });
    }
    let (mut img, mut lit) = splat(buffer, ego, size, resolution)?;
    let max_gap = (HOLE_FILL_DISTANCE / resolution + 1e-9).floor() as usize;
    fill_holes(&mut img, &mut lit, max_gap);
    Ok(img)
}

/// Whether the ego has moved at least 5 m (net, Euclidean) between the
/// first pose of `history` (the last render) and its latest pose.
pub fn should_render(history: &[SE3Pose]) -> bool {
    match (history.first(), history.last()) {
        (Some(a), Some(b)) => a.translation().distance(b.translation()) >= RENDER_DISPLACEMENT,
        _ => false,
    }
}

/// Streaming form of [`should_render`]: the first pose anchors, and each
/// trigger moves the anchor to the triggering pose.
#[derive(Debug, Clone, Default)]
pub struct RenderTrigger {
    anchor: Option<Point3>,
}

impl RenderTrigger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, pose: &SE3Pose) -> bool {
        let p = pose.translation();
        match self.anchor {
            None => {
                self.anchor = Some(p);
                false
            }
            Some(a) if a.distance(p) >= RENDER_DISPLACEMENT => {
                self.anchor = Some(p);
                true
            }
            Some(_) => false,
        }
    }
}

/// One line of a pose history file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub timestamp_ns: u64,
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

impl PoseRecord {
    pub fn new(timestamp_ns: u64, pose: &SE3Pose) -> Self {
        let [qw, qx, qy, qz] = pose.rotation();
        let t = pose.translation();
        PoseRecord {
            timestamp_ns,
            qw,
            qx,
            qy,
            qz,
            tx: t.x,
            ty: t.y,
            tz: t.z,
        }
    }

    pub fn pose(&self) -> Result<SE3Pose> {
        SE3Pose::new([self.qw, self.qx, self.qy, self.qz], Point3::new(self.tx, self.ty, self.tz))
    }
}

pub fn write_pose_history(records: &[PoseRecord], mut w: impl Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_pose_history(r: impl BufRead) -> Result<Vec<PoseRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PoseRecord = serde_json::from_str(&line)
            .map_err(|e| Error::format("pose history", format!("line {}: {e}", i + 1)))?;
        rec.pose().map_err(|e| Error::format("pose history", format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Number of non-black pixels.
pub fn lit_pixel_count(img: &RasterImage) -> usize {
    img.pixels().filter(|p| *p != Rgb::BLACK).count()
}
