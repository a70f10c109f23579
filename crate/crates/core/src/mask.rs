//! Landmark-driven mattes.
//!
//! Polygons are rasterized at pixel centres: pixel `(row, col)` is the point
//! `(x = col, y = row)`, and centres lying exactly on an edge count as
//! inside. So the square with corners (2,2) and (6,6) covers 5×5 = 25 pixels.
//!
//! Geometry of the six kinds, on the iBUG 68-point layout:
//! - whole face: convex hull of all points
//! - narrowed face: that hull scaled toward its area centroid
//! - face with forehead: hull of all points plus the brow points pushed
//!   away from the eyes by a multiple of the mean brow-to-eye distance
//! - face boundary: whole face minus narrowed face
//! - mouth region: mouth hull grown by a fixed radius
//! - facial organs: union of grown eye, nose and mouth hulls

use std::path::Path;

use crate::editor::elastic_transform;
use crate::error::{Error, Result};
use crate::filter::{blur_plane, GaussianKernel};
use crate::geometry::{
    convex_hull, distance, distance_to_segment, mean_point, point_in_polygon, polygon_centroid,
    scale_about,
};
use crate::media::{regions, to_u8, GrayImage, Landmarks, Plane, Point};
use crate::rpg::{MaskKind, MaskParams};

/// Soft matte with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    plane: Plane,
}

impl Mask {
    pub fn new(plane: Plane) -> Result<Self> {
        if let Some(v) = plane.data().iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "mask value {v} outside [0, 1]"
            )));
        }
        Ok(Self { plane })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            plane: Plane::zeros(height, width),
        }
    }

    pub fn filled(height: usize, width: usize, v: f64) -> Self {
        assert!((0.0..=1.0).contains(&v));
        Self {
            plane: Plane::filled(height, width, v),
        }
    }

    pub fn height(&self) -> usize {
        self.plane.height()
    }

    pub fn width(&self) -> usize {
        self.plane.width()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.plane.dims()
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    pub fn data(&self) -> &[f64] {
        self.plane.data()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.plane.get(row, col)
    }

    pub fn is_empty(&self) -> bool {
        self.plane.data().iter().all(|&v| v == 0.0)
    }

    /// Number of pixels with a non-zero value.
    pub fn support(&self) -> usize {
        self.plane.data().iter().filter(|&&v| v > 0.0).count()
    }

    /// Pointwise maximum.
    pub fn union(&self, other: &Mask) -> Mask {
        self.zip(other, f64::max)
    }

    /// `self · (1 − other)`.
    pub fn minus(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a * (1.0 - b))
    }

    fn zip(&self, other: &Mask, f: impl Fn(f64, f64) -> f64) -> Mask {
        assert_eq!(self.dims(), other.dims());
        let (h, w) = self.dims();
        let data = self
            .data()
            .iter()
            .zip(other.data())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Mask {
            plane: Plane::new(h, w, data).expect("same dims"),
        }
    }

    /// 8-bit view, `round(value·255)`.
    pub fn to_gray(&self) -> GrayImage {
        let (h, w) = self.dims();
        GrayImage::new(h, w, self.data().iter().map(|&v| to_u8(v * 255.0)).collect())
            .expect("same dims")
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_gray().save_png(path)
    }
}

/// Tunable constants of the mask constructions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskGeometry {
    pub narrow_factor: f64,
    pub forehead_factor: f64,
    pub dilation: f64,
}

impl Default for MaskGeometry {
    fn default() -> Self {
        Self {
            narrow_factor: 0.9,
            forehead_factor: 1.5,
            dilation: 4.0,
        }
    }
}

fn bbox(points: &[Point], pad: f64, height: usize, width: usize) -> Option<(usize, usize, usize, usize)> {
    let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - pad;
    let max_x = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + pad;
    let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - pad;
    let max_y = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + pad;
    if max_x < 0.0 || max_y < 0.0 || min_x > (width - 1) as f64 || min_y > (height - 1) as f64 {
        return None;
    }
    Some((
        min_y.ceil().max(0.0) as usize,
        (max_y.floor() as usize).min(height - 1),
        min_x.ceil().max(0.0) as usize,
        (max_x.floor() as usize).min(width - 1),
    ))
}

fn paint(height: usize, width: usize, region: Option<(usize, usize, usize, usize)>, inside: impl Fn(Point) -> bool) -> Mask {
    let mut plane = Plane::zeros(height, width);
    if let Some((r0, r1, c0, c1)) = region {
        for i in r0..=r1 {
            for j in c0..=c1 {
                if inside(Point::new(j as f64, i as f64)) {
                    plane.set(i, j, 1.0);
                }
            }
        }
    }
    Mask { plane }
}

/// Binary even-odd fill of the closed polygon, clipped to the frame.
pub fn rasterize_polygon(points: &[Point], height: usize, width: usize) -> Result<Mask> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    let region = bbox(points, 0.0, height, width);
    Ok(paint(height, width, region, |p| point_in_polygon(p, points)))
}

/// Convex hull of `points` grown by `radius` pixels (Minkowski sum with a disc).
pub fn dilated_hull(points: &[Point], radius: f64, height: usize, width: usize) -> Result<Mask> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    let n = hull.len();
    let region = bbox(&hull, radius, height, width);
    Ok(paint(height, width, region, |p| {
        point_in_polygon(p, &hull)
            || (0..n).any(|k| distance_to_segment(p, hull[k], hull[(k + 1) % n]) <= radius)
    }))
}

/// Brow points pushed away from the eyes, used to extend the face upward.
pub fn forehead_points(landmarks: &Landmarks, factor: f64) -> Vec<Point> {
    let left_eye = mean_point(landmarks.region(regions::LEFT_EYE));
    let right_eye = mean_point(landmarks.region(regions::RIGHT_EYE));
    let brows = landmarks.region(regions::BROWS);
    let eyes = mean_point(&[left_eye, right_eye]);
    let brow_center = mean_point(brows);

    let mut up = Point::new(brow_center.x - eyes.x, brow_center.y - eyes.y);
    let norm = (up.x * up.x + up.y * up.y).sqrt();
    up = if norm > 1e-9 {
        Point::new(up.x / norm, up.y / norm)
    } else {
        Point::new(0.0, -1.0)
    };

    let split = regions::RIGHT_BROW.start - regions::BROWS.start;
    let mean_dist = brows
        .iter()
        .enumerate()
        .map(|(k, &b)| distance(b, if k < split { left_eye } else { right_eye }))
        .sum::<f64>()
        / brows.len() as f64;
    let shift = factor * mean_dist;
    brows
        .iter()
        .map(|b| Point::new(b.x + up.x * shift, b.y + up.y * shift))
        .collect()
}

pub fn build_mask(landmarks: &Landmarks, kind: MaskKind, height: usize, width: usize) -> Result<Mask> {
    build_mask_with(landmarks, kind, height, width, &MaskGeometry::default())
}

pub fn build_mask_with(
    landmarks: &Landmarks,
    kind: MaskKind,
    height: usize,
    width: usize,
    geometry: &MaskGeometry,
) -> Result<Mask> {
    let face = convex_hull(landmarks.points());
    if face.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    let narrowed = || {
        let c = polygon_centroid(&face);
        rasterize_polygon(&scale_about(&face, c, geometry.narrow_factor), height, width)
    };
    let grown = |r: std::ops::Range<usize>| {
        dilated_hull(landmarks.region(r), geometry.dilation, height, width)
    };
    let mask = match kind {
        MaskKind::WholeFace => rasterize_polygon(&face, height, width)?,
        MaskKind::NarrowedFace => narrowed()?,
        MaskKind::FaceWithForehead => {
            let mut pts = landmarks.points().to_vec();
            pts.extend(forehead_points(landmarks, geometry.forehead_factor));
            rasterize_polygon(&convex_hull(&pts), height, width)?
        }
        MaskKind::FaceBoundary => rasterize_polygon(&face, height, width)?.minus(&narrowed()?),
        MaskKind::MouthRegion => grown(regions::MOUTH)?,
        MaskKind::FacialOrgans => grown(regions::LEFT_EYE)?
            .union(&grown(regions::RIGHT_EYE)?)
            .union(&grown(regions::NOSE)?)
            .union(&grown(regions::MOUTH)?),
    };
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(mask)
}

/// Elastic deformation followed by a Gaussian blur of size `kernel_size`.
pub fn finalize_mask(mask: &Mask, params: &MaskParams) -> Mask {
    let d = params.deform;
    let deformed = elastic_transform(&mask.plane, d.sigma, d.alpha, d.noise_seed);
    let soft = blur_plane(&deformed, &GaussianKernel::from_size(params.kernel_size));
    Mask {
        plane: soft.map(|v| v.clamp(0.0, 1.0)),
    }
}
