use std::cell::RefCell;
use std::rc::Rc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Ray3, SE3Pose};
use crate::ortho::{tessellate_ground, MeshIndex, MESH_RADIUS};
use crate::render::{CameraModel, RasterImage};

use super::scene::SyntheticScene;

/// Supplier of camera frames, one per (sweep, camera).
pub trait SensorSource {
    /// Frame of `camera` at `sweep` and its capture timestamp.
    fn read(&mut self, sweep: usize, camera: usize) -> Result<(RasterImage, u64)>;

    /// Called right before a sensor render for `timestamp_ns` is produced.
    fn on_render(&mut self, _timestamp_ns: u64) {}
}

/// Renders camera frames of a synthetic scene by casting every pixel onto
/// the ground mesh and sampling the painted-ground texture there. All
/// cameras of a sweep are rendered together and cached.
pub struct SyntheticSensor<'a> {
    scene: &'a SyntheticScene,
    cached: Option<(usize, Vec<RasterImage>)>,
}

impl<'a> SyntheticSensor<'a> {
    pub fn new(scene: &'a SyntheticScene) -> Self {
        SyntheticSensor { scene, cached: None }
    }
}

/// Camera image of `texture` draped over the mesh behind `index`. Pixels
/// whose ray misses the mesh or lands outside the texture stay black.
pub fn synthesize_camera_image(texture: &RasterImage, camera: &CameraModel, ego: &SE3Pose, index: &MeshIndex) -> RasterImage {
    let geo = texture.georef.expect("texture is georeferenced");
    let city_from_cam = camera.city_from_camera(ego);
    let origin = city_from_cam.translation();
    let rows: Vec<Vec<u8>> = (0..camera.height)
        .into_par_iter()
        .map(|v| {
            let mut row = vec![0u8; 3 * camera.width];
            for u in 0..camera.width {
                let dir = city_from_cam.rotate(camera.pixel_ray(u as f64 + 0.5, v as f64 + 0.5));
                let Ok(ray) = Ray3::towards(origin, dir) else { continue };
                let Some((_, hit)) = index.nearest_hit(&ray) else { continue };
                let [c, r] = geo.to_pixel(ray.at(hit.distance).xy());
                let (c, r) = (c.floor(), r.floor());
                if c >= 0.0 && r >= 0.0 && (c as usize) < texture.width() && (r as usize) < texture.height() {
                    row[3 * u..3 * u + 3].copy_from_slice(&texture.get(c as usize, r as usize).0);
                }
            }
            row
        })
        .collect();
    RasterImage::from_raw(camera.width, camera.height, rows.concat()).expect("row sizes match")
}

impl SensorSource for SyntheticSensor<'_> {
    fn read(&mut self, sweep: usize, camera: usize) -> Result<(RasterImage, u64)> {
        let scene = self.scene;
        if camera >= scene.rig.len() {
            return Err(Error::InvalidParameter(format!("no camera {camera} in rig")));
        }
        let ego = *scene
            .trajectory
            .get(sweep)
            .ok_or_else(|| Error::InvalidParameter(format!("no sweep {sweep} in trajectory")))?;
        if self.cached.as_ref().is_none_or(|(s, _)| *s != sweep) {
            let mesh = tessellate_ground(&scene.map.ground, ego.translation().xy(), MESH_RADIUS)?;
            let index = MeshIndex::new(&mesh);
            let images = scene
                .rig
                .iter()
                .map(|cam| synthesize_camera_image(&scene.texture, cam, &ego, &index))
                .collect();
            self.cached = Some((sweep, images));
        }
        let images = &self.cached.as_ref().expect("cache filled").1;
        Ok((images[camera].clone(), scene.timestamps_ns[sweep]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceEvent {
    Read { timestamp_ns: u64 },
    Render { timestamp_ns: u64 },
}

/// Wraps a source and logs every read and render in call order.
pub struct AuditedSource<S> {
    inner: S,
    log: Rc<RefCell<Vec<SourceEvent>>>,
}

impl<S> AuditedSource<S> {
    pub fn new(inner: S) -> Self {
        AuditedSource {
            inner,
            log: Rc::default(),
        }
    }

    pub fn log(&self) -> Rc<RefCell<Vec<SourceEvent>>> {
        Rc::clone(&self.log)
    }
}

impl<S: SensorSource> SensorSource for AuditedSource<S> {
    fn read(&mut self, sweep: usize, camera: usize) -> Result<(RasterImage, u64)> {
        let (img, ts) = self.inner.read(sweep, camera)?;
        self.log.borrow_mut().push(SourceEvent::Read { timestamp_ns: ts });
        Ok((img, ts))
    }

    fn on_render(&mut self, timestamp_ns: u64) {
        self.log.borrow_mut().push(SourceEvent::Render { timestamp_ns });
        self.inner.on_render(timestamp_ns);
    }
}

/// Renders for which some earlier read was captured after the render
/// timestamp. Empty when the pipeline never looked ahead.
pub fn anticipation_violations(log: &[SourceEvent]) -> Vec<(u64, u64)> {
    let mut latest = None::<u64>;
    let mut out = Vec::new();
    for e in log {
        match *e {
            SourceEvent::Read { timestamp_ns } => latest = Some(latest.map_or(timestamp_ns, |l| l.max(timestamp_ns))),
            SourceEvent::Render { timestamp_ns } => {
                if let Some(l) = latest.filter(|l| *l > timestamp_ns) {
                    out.push((timestamp_ns, l));
                }
            }
        }
    }
    out
}
