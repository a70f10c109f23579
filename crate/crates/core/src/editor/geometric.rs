//! Elastic transform, dense warp and landmark-driven triangular stretch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::filter::{blur_plane, sample_bilinear, GaussianKernel};
use crate::geometry::{all_collinear, barycentric};
use crate::media::{Frame, GrayImage, Landmarks, Plane, Point};

/// Per-pixel source coordinates: `rows[i,j]` and `cols[i,j]` say where
/// output pixel `(i, j)` reads from.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub rows: Plane,
    pub cols: Plane,
}

impl DisplacementField {
    pub fn identity(height: usize, width: usize) -> Self {
        Self {
            rows: Plane::from_fn(height, width, |i, _| i as f64),
            cols: Plane::from_fn(height, width, |_, j| j as f64),
        }
    }

    /// Smooth random field: uniform noise in (−1, 1) per axis, blurred with
    /// `sigma` and scaled by `alpha`, added to the identity grid.
    ///
    /// Noise draw order is fixed: all row offsets (row-major), then all
    /// column offsets, from a ChaCha8 stream seeded with `seed`.
    pub fn elastic(height: usize, width: usize, sigma: f64, alpha: f64, seed: u64) -> Self {
        let mut field = Self::identity(height, width);
        if alpha == 0.0 {
            return field;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut noise = || {
            let data = (0..height * width)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            Plane::new(height, width, data).expect("sized above")
        };
        let dr = noise();
        let dc = noise();
        let kernel = GaussianKernel::from_sigma(sigma);
        let dr = blur_plane(&dr, &kernel);
        let dc = blur_plane(&dc, &kernel);
        for k in 0..height * width {
            field.rows.data[k] += dr.data[k] * alpha;
            field.cols.data[k] += dc.data[k] * alpha;
        }
        field
    }

    pub fn dims(&self) -> (usize, usize) {
        self.rows.dims()
    }

    /// Floor-then-clamp integer source index for output pixel `(i, j)`.
    #[inline]
    pub fn source_index(&self, i: usize, j: usize) -> (usize, usize) {
        let (h, w) = self.dims();
        let r = self.rows.get(i, j).floor().clamp(0.0, (h - 1) as f64) as usize;
        let c = self.cols.get(i, j).floor().clamp(0.0, (w - 1) as f64) as usize;
        (r, c)
    }
}

/// Images that can be resampled through a displacement field by pure
/// integer indexing.
pub trait Remap: Sized {
    fn dims(&self) -> (usize, usize);
    fn remap_nearest(&self, field: &DisplacementField) -> Self;
}

impl Remap for Frame {
    fn dims(&self) -> (usize, usize) {
        Frame::dims(self)
    }

    fn remap_nearest(&self, field: &DisplacementField) -> Frame {
        let (h, w) = self.dims();
        Frame::from_fn(h, w, |i, j| {
            let (r, c) = field.source_index(i, j);
            self.pixel(r, c)
        })
    }
}

impl Remap for Plane {
    fn dims(&self) -> (usize, usize) {
        Plane::dims(self)
    }

    fn remap_nearest(&self, field: &DisplacementField) -> Plane {
        let (h, w) = self.dims();
        Plane::from_fn(h, w, |i, j| {
            let (r, c) = field.source_index(i, j);
            self.get(r, c)
        })
    }
}

impl Remap for GrayImage {
    fn dims(&self) -> (usize, usize) {
        (self.height(), self.width())
    }

    fn remap_nearest(&self, field: &DisplacementField) -> GrayImage {
        let (h, w) = Remap::dims(self);
        let mut data = Vec::with_capacity(h * w);
        for i in 0..h {
            for j in 0..w {
                let (r, c) = field.source_index(i, j);
                data.push(self.get(r, c));
            }
        }
        GrayImage::new(h, w, data).expect("dimensions preserved")
    }
}

/// Per-pixel elastic displacement with nearest-lower-integer sampling.
pub fn elastic_transform<T: Remap>(image: &T, sigma: f64, alpha: f64, seed: u64) -> T {
    let (h, w) = image.dims();
    let field = DisplacementField::elastic(h, w, sigma, alpha, seed);
    image.remap_nearest(&field)
}

pub const DENSE_GRID: usize = 4;

/// Smooth warp from a 4×4 grid of random offsets in `[−amp, amp]`,
/// bilinearly upsampled over the frame and sampled bilinearly.
pub fn dense_warp(frame: &Frame, amp: f64, seed: u64) -> Frame {
    if amp == 0.0 {
        return frame.clone();
    }
    let (h, w) = frame.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = DENSE_GRID;
    let mut grid = || {
        let data = (0..n * n).map(|_| rng.random_range(-amp..=amp)).collect();
        Plane::new(n, n, data).expect("sized above")
    };
    let grid_rows = grid();
    let grid_cols = grid();

    let to_grid = |v: usize, len: usize| {
        if len <= 1 {
            0.0
        } else {
            v as f64 * (n - 1) as f64 / (len - 1) as f64
        }
    };
    let planes = frame.to_planes();
    let mut out = frame.clone();
    let data = out.data_mut();
    for i in 0..h {
        let gy = to_grid(i, h);
        for j in 0..w {
            let gx = to_grid(j, w);
            let sy = i as f64 + sample_bilinear(&grid_rows, gy, gx);
            let sx = j as f64 + sample_bilinear(&grid_cols, gy, gx);
            for (c, p) in planes.iter().enumerate() {
                data[(i * w + j) * 3 + c] = crate::media::to_u8(sample_bilinear(p, sy, sx));
            }
        }
    }
    out
}

/// A source triangle and where it should land.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrianglePair {
    pub source: [Point; 3],
    pub target: [Point; 3],
}

/// Piecewise-affine warp. Each output pixel centre inside a target
/// triangle is mapped back through that triangle's affine map and sampled
/// bilinearly; the first triangle containing a pixel wins. Pixels outside
/// every target triangle keep their input value.
pub fn warp_triangles(frame: &Frame, pairs: &[TrianglePair]) -> Frame {
    let (h, w) = frame.dims();
    let planes = frame.to_planes();
    let mut out = frame.clone();
    let mut written = vec![false; h * w];
    let data = out.data_mut();
    for pair in pairs {
        let t = &pair.target;
        if barycentric(t[0], t).is_none() {
            continue;
        }
        let min_x = t.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).floor().max(0.0);
        let max_x = t.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).ceil();
        let min_y = t.iter().map(|p| p.y).fold(f64::INFINITY, f64::min).floor().max(0.0);
        let max_y = t.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max).ceil();
        if max_x < 0.0 || max_y < 0.0 {
            continue;
        }
        let (x0, x1) = (min_x as usize, (max_x as usize).min(w - 1));
        let (y0, y1) = (min_y as usize, (max_y as usize).min(h - 1));
        for i in y0..=y1 {
            for j in x0..=x1 {
                let k = i * w + j;
                if written[k] {
                    continue;
                }
                let Some(l) = barycentric(Point::new(j as f64, i as f64), t) else {
                    continue;
                };
                if l.iter().any(|&v| v < -1e-9) {
                    continue;
                }
                let s = &pair.source;
                let sx = l[0] * s[0].x + l[1] * s[1].x + l[2] * s[2].x;
                let sy = l[0] * s[0].y + l[1] * s[1].y + l[2] * s[2].y;
                for (c, p) in planes.iter().enumerate() {
                    data[k * 3 + c] = crate::media::to_u8(sample_bilinear(p, sy, sx));
                }
                written[k] = true;
            }
        }
    }
    out
}

/// Four corners and four edge midpoints, in pixel-centre coordinates.
pub fn border_anchors(height: usize, width: usize) -> [Point; 8] {
    let (r, b) = ((width - 1) as f64, (height - 1) as f64);
    [
        Point::new(0.0, 0.0),
        Point::new(r, 0.0),
        Point::new(0.0, b),
        Point::new(r, b),
        Point::new(r / 2.0, 0.0),
        Point::new(r / 2.0, b),
        Point::new(0.0, b / 2.0),
        Point::new(r, b / 2.0),
    ]
}

/// Delaunay-triangulates the landmarks plus border anchors, jitters every
/// landmark by `U(−jitter, jitter)` per axis (anchors stay fixed) and warps
/// each triangle onto its jittered counterpart.
pub fn triangular_stretch(
    frame: &Frame,
    landmarks: &Landmarks,
    jitter: f64,
    seed: u64,
) -> Result<Frame> {
    if all_collinear(landmarks.points()) {
        return Err(Error::DegenerateTriangulation);
    }
    let (h, w) = frame.dims();
    let mut source: Vec<Point> = landmarks.points().to_vec();
    let n_landmarks = source.len();
    source.extend(border_anchors(h, w));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target: Vec<Point> = source
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if k < n_landmarks && jitter > 0.0 {
                let dx = rng.random_range(-jitter..=jitter);
                let dy = rng.random_range(-jitter..=jitter);
                Point::new(p.x + dx, p.y + dy)
            } else {
                *p
            }
        })
        .collect();

    let dpoints: Vec<delaunator::Point> = source
        .iter()
        .map(|p| delaunator::Point { x: p.x, y: p.y })
        .collect();
    let tri = delaunator::triangulate(&dpoints);
    if tri.triangles.is_empty() {
        return Err(Error::DegenerateTriangulation);
    }
    let pairs: Vec<TrianglePair> = tri
        .triangles
        .chunks_exact(3)
        .map(|t| TrianglePair {
            source: [source[t[0]], source[t[1]], source[t[2]]],
            target: [target[t[0]], target[t[1]], target[t[2]]],
        })
        .collect();
    Ok(warp_triangles(frame, &pairs))
}
