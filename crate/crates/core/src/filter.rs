//! Gaussian blur, bilinear sampling and resizing shared by the editor,
//! mask generator, blender and diagnostics.
//!
//! All borders use edge replication.

use crate::media::{Frame, Plane};

/// Normalized 1-D Gaussian kernel, applied separably.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    weights: Vec<f64>,
    radius: usize,
    sigma: f64,
}

impl GaussianKernel {
    /// Kernel with radius `ceil(3σ)`.
    pub fn from_sigma(sigma: f64) -> Self {
        assert!(sigma > 0.0 && sigma.is_finite(), "sigma must be positive");
        let radius = (3.0 * sigma).ceil().max(1.0) as usize;
        Self::build(sigma, radius)
    }

    /// Kernel of odd size `size`; sigma follows the usual
    /// `0.3·((size−1)/2 − 1) + 0.8` rule for size-specified blurs.
    pub fn from_size(size: usize) -> Self {
        assert!(size % 2 == 1 && size >= 1, "kernel size must be odd");
        let radius = (size - 1) / 2;
        let sigma = 0.3 * (radius as f64 - 1.0) + 0.8;
        Self::build(sigma, radius)
    }

    fn build(sigma: f64, radius: usize) -> Self {
        let r = radius as isize;
        let mut weights: Vec<f64> = (-r..=r)
            .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
            .collect();
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= sum);
        Self {
            weights,
            radius,
            sigma,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }
}

#[inline]
fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Separable convolution, rows first then columns.
pub fn blur_plane(src: &Plane, kernel: &GaussianKernel) -> Plane {
    let (h, w) = src.dims();
    let r = kernel.radius as isize;
    let k = &kernel.weights;

    let mut tmp = vec![0.0; h * w];
    for i in 0..h {
        let row = &src.data[i * w..(i + 1) * w];
        for j in 0..w {
            let mut acc = 0.0;
            for (t, wt) in k.iter().enumerate() {
                acc += wt * row[clamp_index(j as isize + t as isize - r, w)];
            }
            tmp[i * w + j] = acc;
        }
    }

    let mut out = vec![0.0; h * w];
    for i in 0..h {
        for (t, wt) in k.iter().enumerate() {
            let si = clamp_index(i as isize + t as isize - r, h);
            let src_row = &tmp[si * w..(si + 1) * w];
            let dst_row = &mut out[i * w..(i + 1) * w];
            for (d, s) in dst_row.iter_mut().zip(src_row) {
                *d += wt * s;
            }
        }
    }
    Plane::new(h, w, out).expect("dimensions preserved")
}

pub fn blur_frame(frame: &Frame, kernel: &GaussianKernel) -> Frame {
    let planes = frame.to_planes().map(|p| blur_plane(&p, kernel));
    Frame::from_planes(&planes)
}

/// Bilinear sample at (`y`, `x`) with coordinates clamped into the image.
#[inline]
pub fn sample_bilinear(plane: &Plane, y: f64, x: f64) -> f64 {
    let (h, w) = plane.dims();
    let y = y.clamp(0.0, (h - 1) as f64);
    let x = x.clamp(0.0, (w - 1) as f64);
    let y0 = y.floor() as usize;
    let x0 = x.floor() as usize;
    let y1 = (y0 + 1).min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let fy = y - y0 as f64;
    let fx = x - x0 as f64;
    let top = plane.get(y0, x0) * (1.0 - fx) + plane.get(y0, x1) * fx;
    let bottom = plane.get(y1, x0) * (1.0 - fx) + plane.get(y1, x1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Bilinear resize with half-pixel centers.
pub fn resize_plane(src: &Plane, height: usize, width: usize) -> Plane {
    let (h, w) = src.dims();
    let sy = h as f64 / height as f64;
    let sx = w as f64 / width as f64;
    Plane::from_fn(height, width, |i, j| {
        let y = (i as f64 + 0.5) * sy - 0.5;
        let x = (j as f64 + 0.5) * sx - 0.5;
        sample_bilinear(src, y, x)
    })
}

pub fn resize_frame(frame: &Frame, height: usize, width: usize) -> Frame {
    let planes = frame.to_planes().map(|p| resize_plane(&p, height, width));
    Frame::from_planes(&planes)
}

/// Mean absolute 4-neighbour Laplacian, a simple high-frequency energy measure.
pub fn laplacian_energy(plane: &Plane) -> f64 {
    let (h, w) = plane.dims();
    let mut acc = 0.0;
    for i in 0..h {
        for j in 0..w {
            let at = |di: isize, dj: isize| {
                plane.get(
                    clamp_index(i as isize + di, h),
                    clamp_index(j as isize + dj, w),
                )
            };
            acc += (4.0 * at(0, 0) - at(-1, 0) - at(1, 0) - at(0, -1) - at(0, 1)).abs();
        }
    }
    acc / (h * w) as f64
}
