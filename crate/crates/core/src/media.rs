//! Frames, landmarks and clips, plus their on-disk formats.
//!
//! Frames are 8-bit RGB, row-major. A clip directory holds one lossless PNG
//! per frame named with a zero-padded 6-digit index (`000000.png`, ...) and,
//! for generated clips, a `trace.json` sidecar. Landmark files are a JSON
//! array of `L` rows, each row 68 `[x, y]` pairs in pixel units with the
//! origin at the top-left corner.

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rpg::Trace;

pub const NUM_LANDMARKS: usize = 68;

/// Default clip length used by the generator.
pub const DEFAULT_CLIP_LEN: usize = 32;
/// Default square crop size the generator is tuned for.
pub const DEFAULT_CROP: usize = 299;
/// Frames smaller than this on either side are rejected by the pipeline.
pub const MIN_PIPELINE_SIDE: usize = 32;

/// iBUG 68-point layout.
pub mod regions {
    use std::ops::Range;

    pub const JAW: Range<usize> = 0..17;
    pub const BROWS: Range<usize> = 17..27;
    pub const LEFT_BROW: Range<usize> = 17..22;
    pub const RIGHT_BROW: Range<usize> = 22..27;
    pub const NOSE: Range<usize> = 27..36;
    pub const LEFT_EYE: Range<usize> = 36..42;
    pub const RIGHT_EYE: Range<usize> = 42..48;
    pub const MOUTH: Range<usize> = 48..68;
}

pub const FRAME_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp"];
pub const TRACE_FILE: &str = "trace.json";

#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    // round half away from zero, then saturate
    v.round().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl Frame {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidFrame(format!(
                "zero-sized frame {height}x{width}"
            )));
        }
        if data.len() != height * width * 3 {
            return Err(Error::InvalidFrame(format!(
                "expected {} samples for {height}x{width}x3, got {}",
                height * width * 3,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, rgb: [u8; 3]) -> Self {
        Self::from_fn(height, width, |_, _| rgb)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        assert!(height > 0 && width > 0, "zero-sized frame");
        let mut data = Vec::with_capacity(height * width * 3);
        for i in 0..height {
            for j in 0..width {
                data.extend_from_slice(&f(i, j));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> u8 {
        self.data[(row * self.width + col) * 3 + channel]
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let k = (row * self.width + col) * 3;
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    /// Applies `f` to every sample independently.
    pub fn map_samples(&self, f: impl Fn(u8) -> u8) -> Frame {
        Frame {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Splits the frame into three float channel planes on the 0..255 scale.
    pub fn to_planes(&self) -> [Plane; 3] {
        std::array::from_fn(|c| {
            Plane::from_fn(self.height, self.width, |i, j| self.get(i, j, c) as f64)
        })
    }

    /// Reassembles a frame from channel planes, rounding and saturating.
    pub fn from_planes(planes: &[Plane; 3]) -> Frame {
        let (h, w) = planes[0].dims();
        debug_assert!(planes.iter().all(|p| p.dims() == (h, w)));
        let mut data = Vec::with_capacity(h * w * 3);
        for k in 0..h * w {
            for p in planes {
                data.push(to_u8(p.data[k]));
            }
        }
        Frame {
            height: h,
            width: w,
            data,
        }
    }

    pub fn to_image(&self) -> image::RgbImage {
        image::RgbImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .expect("frame buffer length is checked at construction")
    }

    pub fn from_image(img: &image::RgbImage) -> Frame {
        Frame {
            height: img.height() as usize,
            width: img.width() as usize,
            data: img.as_raw().clone(),
        }
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_image()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| image_err(path, e))
    }

    pub fn open(path: &Path) -> Result<Frame> {
        let img = image::open(path).map_err(|e| image_err(path, e))?;
        Ok(Frame::from_image(&img.to_rgb8()))
    }
}

fn image_err(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

/// Single-channel 8-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::InvalidFrame(format!(
                "expected {} samples for {height}x{width}, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn to_plane(&self) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let img =
            image::GrayImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
                .expect("gray buffer length is checked at construction");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| image_err(path, e))
    }
}

/// Dense single-channel float image. Used for blur inputs, displacement
/// components, residual maps and mattes.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    height: usize,
    width: usize,
    pub(crate) data: Vec<f64>,
}

impl Plane {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples for {height}x{width}, got {}",
                height * width,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    pub fn filled(height: usize, width: usize, v: f64) -> Self {
        Self {
            height,
            width,
            data: vec![v; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for i in 0..height {
            for j in 0..width {
                data.push(f(i, j));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.width + col] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Plane {
        Plane {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn std(&self) -> f64 {
        let m = self.mean();
        (self.data.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.data.len() as f64).sqrt()
    }
}

/// RGB to luma with BT.601 weights, rounded and saturated.
pub fn rgb_to_gray(frame: &Frame) -> GrayImage {
    let data = frame
        .data
        .chunks_exact(3)
        .map(|p| to_u8(0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64))
        .collect();
    GrayImage {
        height: frame.height,
        width: frame.width,
        data,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// 68 facial landmarks in pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmarks {
    points: Vec<Point>,
}

impl Landmarks {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() != NUM_LANDMARKS {
            return Err(Error::InvalidLandmarks(format!(
                "expected {NUM_LANDMARKS} points, got {}",
                points.len()
            )));
        }
        if let Some(k) = points
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::InvalidLandmarks(format!("point {k} is not finite")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn region(&self, range: Range<usize>) -> &[Point] {
        &self.points[range]
    }

    /// True when at least one point lies strictly inside a `height`×`width` frame.
    pub fn touches_frame(&self, height: usize, width: usize) -> bool {
        self.points
            .iter()
            .any(|p| p.x > 0.0 && p.y > 0.0 && p.x < width as f64 && p.y < height as f64)
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Landmarks {
        Landmarks {
            points: self
                .points
                .iter()
                .map(|p| Point::new(p.x + dx, p.y + dy))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    frames: Vec<Frame>,
    landmarks: Vec<Landmarks>,
    source_id: String,
}

impl Clip {
    pub fn new(frames: Vec<Frame>, landmarks: Vec<Landmarks>, source_id: impl Into<String>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidClip("clip has no frames".into()));
        }
        if frames.len() != landmarks.len() {
            return Err(Error::CountMismatch {
                frames: frames.len(),
                landmarks: landmarks.len(),
            });
        }
        let dims = frames[0].dims();
        if let Some(f) = frames.iter().find(|f| f.dims() != dims) {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: f.dims(),
            });
        }
        if let Some(t) = landmarks.iter().position(|l| !l.touches_frame(dims.0, dims.1)) {
            return Err(Error::InvalidLandmarks(format!(
                "frame {t}: no landmark lies inside the {}x{} frame",
                dims.0, dims.1
            )));
        }
        Ok(Self {
            frames,
            landmarks,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn landmarks(&self) -> &[Landmarks] {
        &self.landmarks
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Keeps only the first `n` frames.
    pub fn truncated(mut self, n: usize) -> Result<Clip> {
        if n == 0 {
            return Err(Error::InvalidClip("clip has no frames".into()));
        }
        self.frames.truncate(n);
        self.landmarks.truncate(n);
        Ok(self)
    }

    /// Same landmarks and id, new pixels.
    pub fn with_frames(&self, frames: Vec<Frame>) -> Result<Clip> {
        Clip::new(frames, self.landmarks.clone(), self.source_id.clone())
    }
}

pub fn parse_landmark_document(text: &str) -> Result<Vec<Landmarks>> {
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("landmark document: {e}")))?;
    rows.into_iter()
        .enumerate()
        .map(|(t, row)| {
            Landmarks::new(row.into_iter().map(|[x, y]| Point::new(x, y)).collect()).map_err(|e| {
                Error::InvalidLandmarks(format!("row {t}: {e}"))
            })
        })
        .collect()
}

pub fn landmark_document(rows: &[Landmarks]) -> String {
    let doc: Vec<Vec<[f64; 2]>> = rows
        .iter()
        .map(|l| l.points.iter().map(|p| [p.x, p.y]).collect())
        .collect();
    serde_json::to_string(&doc).expect("landmark rows always serialize")
}

pub fn read_landmarks(path: &Path) -> Result<Vec<Landmarks>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_landmark_document(&text)
}

pub fn write_landmarks(path: &Path, rows: &[Landmarks]) -> Result<()> {
    fs::write(path, landmark_document(rows)).map_err(|e| Error::io(path, e))
}

/// Image files in `dir`, sorted by file name.
pub fn list_frame_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| FRAME_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false);
        if is_image && path.is_file() {
            files.push(path);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Opens every frame file in `dir` in file-name order.
pub fn load_frames(dir: &Path) -> Result<Vec<Frame>> {
    let files = list_frame_files(dir)?;
    if files.is_empty() {
        return Err(Error::MissingFrames(dir.to_path_buf()));
    }
    files.iter().map(|p| Frame::open(p)).collect()
}

pub fn load_clip(frame_dir: &Path, landmark_file: &Path) -> Result<Clip> {
    let frames = load_frames(frame_dir)?;
    let landmarks = read_landmarks(landmark_file)?;
    if landmarks.len() != frames.len() {
        return Err(Error::CountMismatch {
            frames: frames.len(),
            landmarks: landmarks.len(),
        });
    }
    let source_id = frame_dir
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("clip")
        .to_string();
    Clip::new(frames, landmarks, source_id)
}

pub fn frame_file_name(index: usize) -> String {
    format!("{index:06}.png")
}

/// Writes frames as `000000.png, 000001.png, ...` and the trace as
/// `trace.json` into `out_dir`, creating it if needed.
pub fn save_clip(clip: &Clip, out_dir: &Path, trace: &Trace) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (t, frame) in clip.frames.iter().enumerate() {
        frame.save_png(&out_dir.join(frame_file_name(t)))?;
    }
    let trace_path = out_dir.join(TRACE_FILE);
    fs::write(&trace_path, trace.to_document()).map_err(|e| Error::io(&trace_path, e))?;
    Ok(trace_path)
}
