//! Spatial and temporal regularity diagnostics.
//!
//! - noise residual: gray frame minus its 5×5 Gaussian blur, a zero-centred
//!   high-pass map
//! - temporal slice: for a fixed column, the frames' pixel columns stitched
//!   side by side into an H×L image; its mean absolute horizontal gradient
//!   measures frame-to-frame flicker along that column
//! - per-frame delta: mean absolute difference between consecutive frames

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{blur_plane, GaussianKernel};
use crate::mask::Mask;
use crate::media::{rgb_to_gray, to_u8, Frame, GrayImage, Plane};

pub const REPORT_SCHEMA: &str = "pfake-regularity/v1";
pub const RESIDUAL_KERNEL: usize = 5;
pub const DEFAULT_SLICE_COLUMNS: usize = 8;

pub fn noise_residual(frame: &Frame) -> Plane {
    let gray = rgb_to_gray(frame).to_plane();
    let low = blur_plane(&gray, &GaussianKernel::from_size(RESIDUAL_KERNEL));
    let data = gray.data().iter().zip(low.data()).map(|(g, l)| g - l).collect();
    Plane::new(gray.height(), gray.width(), data).expect("same dims")
}

/// Residual rendered around mid-gray for viewing: `128 + gain·r`.
pub fn residual_image(residual: &Plane, gain: f64) -> GrayImage {
    GrayImage::new(
        residual.height(),
        residual.width(),
        residual.data().iter().map(|&r| to_u8(128.0 + gain * r)).collect(),
    )
    .expect("same dims")
}

/// Shared `(height, width)` of a non-empty frame sequence.
pub fn sequence_dims(frames: &[Frame]) -> Result<(usize, usize)> {
    let first = frames
        .first()
        .ok_or_else(|| Error::InvalidClip("no frames".into()))?;
    let dims = first.dims();
    if let Some(f) = frames.iter().find(|f| f.dims() != dims) {
        return Err(Error::DimensionMismatch {
            expected: dims,
            actual: f.dims(),
        });
    }
    Ok(dims)
}

/// H×L image whose column `t` is column `column` of frame `t` (gray).
pub fn temporal_slice(frames: &[Frame], column: usize) -> Result<GrayImage> {
    let (h, w) = sequence_dims(frames)?;
    let l = frames.len();
    if column >= w {
        return Err(Error::ColumnOutOfRange { column, width: w });
    }
    let grays: Vec<GrayImage> = frames.iter().map(rgb_to_gray).collect();
    let mut data = Vec::with_capacity(h * l);
    for i in 0..h {
        for g in &grays {
            data.push(g.get(i, column));
        }
    }
    GrayImage::new(h, l, data)
}

/// Mean absolute difference between horizontally adjacent samples; 0 for a
/// single-column image.
pub fn slice_energy(slice: &GrayImage) -> f64 {
    let (h, w) = (slice.height(), slice.width());
    if w < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..h {
        for j in 0..w - 1 {
            acc += (slice.get(i, j + 1) as f64 - slice.get(i, j) as f64).abs();
        }
    }
    acc / (h * (w - 1)) as f64
}

/// `count` columns spread evenly across `width`, away from the borders.
pub fn sample_columns(width: usize, count: usize) -> Vec<usize> {
    let count = count.clamp(1, width);
    (0..count)
        .map(|k| ((k as f64 + 0.5) * width as f64 / count as f64).floor() as usize)
        .map(|c| c.min(width - 1))
        .collect()
}

pub fn temporal_slice_energy(frames: &[Frame], columns: usize) -> Result<f64> {
    let (_, w) = sequence_dims(frames)?;
    let cols = sample_columns(w, columns);
    let mut total = 0.0;
    for &c in &cols {
        total += slice_energy(&temporal_slice(frames, c)?);
    }
    Ok(total / cols.len() as f64)
}

/// Mean absolute sample difference between frames `t` and `t+1`, optionally
/// restricted to pixels where `mask > 0`.
pub fn frame_deltas(frames: &[Frame], mask: Option<&Mask>) -> Vec<f64> {
    frames
        .windows(2)
        .map(|pair| {
            let (a, b) = (pair[0].data(), pair[1].data());
            let mut acc = 0.0;
            let mut n = 0usize;
            for k in 0..a.len() / 3 {
                if mask.is_some_and(|m| m.data()[k] <= 0.0) {
                    continue;
                }
                for c in 0..3 {
                    acc += (a[k * 3 + c] as f64 - b[k * 3 + c] as f64).abs();
                }
                n += 3;
            }
            if n == 0 {
                0.0
            } else {
                acc / n as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub mean: f64,
    pub std: f64,
    /// Mean squared residual.
    pub hf_energy: f64,
}

impl RegionStats {
    fn from_samples(samples: &[f64]) -> Self {
        if samples.is_empty() {
            return Self {
                mean: 0.0,
                std: 0.0,
                hf_energy: 0.0,
            };
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let hf = samples.iter().map(|v| v * v).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
            hf_energy: hf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStats {
    pub full: RegionStats,
    pub inside: Option<RegionStats>,
    pub outside: Option<RegionStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub noise_residual: NoiseStats,
    pub temporal_slice_energy: f64,
    pub per_frame_delta: Vec<f64>,
    pub masked_frame_delta: Option<Vec<f64>>,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

impl RegularityReport {
    pub fn mean_frame_delta(&self) -> f64 {
        mean(&self.per_frame_delta)
    }

    pub fn mean_masked_frame_delta(&self) -> Option<f64> {
        self.masked_frame_delta.as_deref().map(mean)
    }
}

pub fn regularity_report(frames: &[Frame], mask: Option<&Mask>, columns: usize) -> Result<RegularityReport> {
    let dims = sequence_dims(frames)?;
    if let Some(m) = mask {
        if m.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: m.dims(),
            });
        }
    }
    let mut full = Vec::new();
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for frame in frames {
        let r = noise_residual(frame);
        for (k, &v) in r.data().iter().enumerate() {
            full.push(v);
            if let Some(m) = mask {
                if m.data()[k] > 0.0 {
                    inside.push(v);
                } else {
                    outside.push(v);
                }
            }
        }
    }
    Ok(RegularityReport {
        noise_residual: NoiseStats {
            full: RegionStats::from_samples(&full),
            inside: mask.map(|_| RegionStats::from_samples(&inside)),
            outside: mask.map(|_| RegionStats::from_samples(&outside)),
        },
        temporal_slice_energy: temporal_slice_energy(frames, columns)?,
        per_frame_delta: frame_deltas(frames, None),
        masked_frame_delta: mask.map(|m| frame_deltas(frames, Some(m))),
    })
}

/// Signed differences, candidate minus real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDelta {
    pub temporal_slice_energy: f64,
    pub mean_frame_delta: f64,
    pub masked_mean_frame_delta: Option<f64>,
    pub noise_std: f64,
    pub noise_hf_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema: String,
    pub columns: usize,
    pub real: RegularityReport,
    pub candidate: RegularityReport,
    pub delta: ReportDelta,
}

impl Comparison {
    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("report always serializes")
    }
}

pub fn compare(real: &[Frame], candidate: &[Frame], mask_hint: Option<&Mask>, columns: usize) -> Result<Comparison> {
    let (expected, actual) = (sequence_dims(real)?, sequence_dims(candidate)?);
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    if real.len() != candidate.len() {
        return Err(Error::ShapeMismatch(format!(
            "real has {} frames, candidate has {}",
            real.len(),
            candidate.len()
        )));
    }
    let a = regularity_report(real, mask_hint, columns)?;
    let b = regularity_report(candidate, mask_hint, columns)?;
    let delta = ReportDelta {
        temporal_slice_energy: b.temporal_slice_energy - a.temporal_slice_energy,
        mean_frame_delta: b.mean_frame_delta() - a.mean_frame_delta(),
        masked_mean_frame_delta: match (b.mean_masked_frame_delta(), a.mean_masked_frame_delta()) {
            (Some(x), Some(y)) => Some(x - y),
            _ => None,
        },
        noise_std: b.noise_residual.full.std - a.noise_residual.full.std,
        noise_hf_energy: b.noise_residual.full.hf_energy - a.noise_residual.full.hf_energy,
    };
    Ok(Comparison {
        schema: REPORT_SCHEMA.to_string(),
        columns,
        real: a,
        candidate: b,
        delta,
    })
}
