use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    pub const BLACK: Rgb = Rgb([0, 0, 0]);
    pub const WHITE: Rgb = Rgb([255, 255, 255]);
    pub const RED: Rgb = Rgb([255, 0, 0]);
    pub const YELLOW: Rgb = Rgb([255, 255, 0]);

    pub fn lerp(self, o: Rgb, t: f64) -> Rgb {
        let mut out = [0u8; 3];
        for (k, v) in out.iter_mut().enumerate() {
            *v = (self.0[k] as f64 + (o.0[k] as f64 - self.0[k] as f64) * t).round().clamp(0.0, 255.0) as u8;
        }
        Rgb(out)
    }
}

/// Placement of a top-down image in the city frame. `origin` is the outer
/// top-left corner of pixel (0, 0); rows grow southwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoRef {
    pub origin: Point2,
    pub resolution: f64,
}

impl GeoRef {
    /// Continuous pixel coordinates (column, row) of a city point.
    pub fn to_pixel(&self, p: Point2) -> [f64; 2] {
        [(p.x - self.origin.x) / self.resolution, (self.origin.y - p.y) / self.resolution]
    }

    /// City coordinates of the center of pixel (col, row).
    pub fn pixel_center(&self, col: usize, row: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.resolution,
            self.origin.y - (row as f64 + 0.5) * self.resolution,
        )
    }
}

/// 8-bit RGB image, row-major, optionally georeferenced.
#[derive(Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
    pub georef: Option<GeoRef>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("georef", &self.georef)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: usize, height: usize) -> Self {
        RasterImage {
            width,
            height,
            data: vec![0; width * height * 3],
            georef: None,
        }
    }

    /// Square top-down image of `size` pixels centered on `center`.
    pub fn centered(center: Point2, size: usize, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution.is_finite()) || size == 0 {
            return Err(Error::InvalidGeometry(format!("bad raster size {size} / resolution {resolution}")));
        }
        let half = 0.5 * size as f64 * resolution;
        let mut img = RasterImage::new(size, size);
        img.georef = Some(GeoRef {
            origin: Point2::new(center.x - half, center.y + half),
            resolution,
        });
        Ok(img)
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::format("image", format!("{} bytes for {width}x{height} RGB", data.len())));
        }
        Ok(RasterImage {
            width,
            height,
            data,
            georef: None,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, col: usize, row: usize) -> Rgb {
        let i = 3 * (row * self.width + col);
        Rgb([self.data[i], self.data[i + 1], self.data[i + 2]])
    }

    pub fn set(&mut self, col: usize, row: usize, c: Rgb) {
        let i = 3 * (row * self.width + col);
        self.data[i..i + 3].copy_from_slice(&c.0);
    }

    pub fn fill(&mut self, c: Rgb) {
        for px in self.data.chunks_exact_mut(3) {
            px.copy_from_slice(&c.0);
        }
    }

    pub fn pixels(&self) -> impl Iterator<Item = Rgb> + '_ {
        self.data.chunks_exact(3).map(|p| Rgb([p[0], p[1], p[2]]))
    }

    pub fn count(&self, c: Rgb) -> usize {
        self.pixels().filter(|p| *p == c).count()
    }

    pub fn write_ppm(&self, mut w: impl Write) -> Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.data)?;
        Ok(())
    }

    pub fn read_ppm(r: impl Read) -> Result<Self> {
        let mut r = std::io::BufReader::new(r);
        let mut fields = Vec::new();
        let mut token = String::new();
        while fields.len() < 4 {
            let buf = r.fill_buf()?;
            if buf.is_empty() {
                return Err(Error::format("PPM", "truncated header"));
            }
            let b = buf[0];
            r.consume(1);
            if b == b'#' && token.is_empty() {
                let mut comment = Vec::new();
                r.read_until(b'\n', &mut comment)?;
            } else if b.is_ascii_whitespace() {
                if !token.is_empty() {
                    fields.push(std::mem::take(&mut token));
                }
            } else {
                token.push(b as char);
            }
        }
        if fields[0] != "P6" {
            return Err(Error::format("PPM", format!("magic {:?}, expected P6", fields[0])));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::format("PPM", format!("bad header field {s:?}")));
        let (width, height, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
        if maxval != 255 {
            return Err(Error::format("PPM", format!("maxval {maxval}, only 255 supported")));
        }
        let mut data = vec![0u8; width * height * 3];
        r.read_exact(&mut data).map_err(|_| Error::format("PPM", "pixel data shorter than header says"))?;
        Self::from_raw(width, height, data)
    }

    pub fn save_ppm(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_ppm(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_ppm(path: &Path) -> Result<Self> {
        Self::read_ppm(std::fs::File::open(path)?)
    }

    #[cfg(feature = "png")]
    pub fn save_png(&self, path: &Path) -> Result<()> {
        image::save_buffer(path, &self.data, self.width as u32, self.height as u32, image::ColorType::Rgb8)
            .map_err(|e| Error::format("PNG", e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageKind {
    MapBev,
    MapEgo,
    SensorBev,
}

impl ImageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ImageKind::MapBev => "map_bev",
            ImageKind::MapEgo => "map_ego",
            ImageKind::SensorBev => "sensor_bev",
        }
    }
}

/// `{log_id}_{timestamp_ns}_{kind}.{ext}`
pub fn image_file_name(log_id: &str, timestamp_ns: u64, kind: ImageKind, ext: &str) -> String {
    format!("{log_id}_{timestamp_ns}_{}.{ext}", kind.as_str())
}
