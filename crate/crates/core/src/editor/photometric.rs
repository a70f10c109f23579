//! Color jitter LUTs, ISO-style noise, unsharp masking and down/up sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::filter::{blur_frame, resize_frame, GaussianKernel};
use crate::media::{rgb_to_gray, to_u8, Frame};

/// 256-entry 8-bit mapping table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lut {
    table: [u8; 256],
}

#[inline]
fn floor_clamp(v: f64) -> u8 {
    v.floor().clamp(0.0, 255.0) as u8
}

impl Lut {
    pub fn from_fn(f: impl Fn(f64) -> f64) -> Self {
        Self {
            table: std::array::from_fn(|k| floor_clamp(f(k as f64))),
        }
    }

    pub fn identity() -> Self {
        Self::from_fn(|k| k)
    }

    /// `T^b[k] = clamp(floor(k·θ))`
    pub fn brightness(factor: f64) -> Self {
        Self::from_fn(|k| k * factor)
    }

    /// `T^s[k] = clamp(floor(k·θ + μ·(1 − θ)))`
    pub fn contrast(factor: f64, mean_gray: f64) -> Self {
        Self::from_fn(|k| k * factor + mean_gray * (1.0 - factor))
    }

    pub fn table(&self) -> &[u8; 256] {
        &self.table
    }

    #[inline]
    pub fn get(&self, v: u8) -> u8 {
        self.table[v as usize]
    }

    pub fn apply(&self, frame: &Frame) -> Frame {
        frame.map_samples(|v| self.table[v as usize])
    }
}

pub fn adjust_brightness(frame: &Frame, factor: f64) -> Frame {
    Lut::brightness(factor).apply(frame)
}

pub fn adjust_contrast(frame: &Frame, factor: f64) -> Frame {
    let mean = rgb_to_gray(frame).mean();
    Lut::contrast(factor, mean).apply(frame)
}

/// Per-pixel blend toward the pixel's own gray value.
pub fn adjust_saturation(frame: &Frame, factor: f64) -> Frame {
    let gray = rgb_to_gray(frame);
    let mut out = frame.clone();
    for (px, &g) in out.data_mut().chunks_exact_mut(3).zip(gray.data()) {
        let g = g as f64 * (1.0 - factor);
        for v in px {
            *v = floor_clamp(*v as f64 * factor + g);
        }
    }
    out
}

/// Brightness, then contrast, then saturation.
pub fn color_jitter(frame: &Frame, brightness: f64, contrast: f64, saturation: f64) -> Frame {
    let f = adjust_brightness(frame, brightness);
    let f = adjust_contrast(&f, contrast);
    adjust_saturation(&f, saturation)
}

/// Additive Gaussian noise whose standard deviation grows with luminance:
/// `sigma · (0.5 + 0.5·gray/255)` per pixel, drawn independently per channel.
pub fn iso_noise(frame: &Frame, sigma: f64, seed: u64) -> Frame {
    if sigma == 0.0 {
        return frame.clone();
    }
    let gray = rgb_to_gray(frame);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = frame.clone();
    for (px, &g) in out.data_mut().chunks_exact_mut(3).zip(gray.data()) {
        let std = sigma * (0.5 + 0.5 * g as f64 / 255.0);
        for v in px {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v = to_u8(*v as f64 + std * z);
        }
    }
    out
}

pub const SHARPEN_KERNEL: usize = 5;

/// Unsharp mask: `in + amount·(in − blur5(in))`.
pub fn sharpen(frame: &Frame, amount: f64) -> Frame {
    if amount == 0.0 {
        return frame.clone();
    }
    let blurred = blur_frame(frame, &GaussianKernel::from_size(SHARPEN_KERNEL));
    let data = frame
        .data()
        .iter()
        .zip(blurred.data())
        .map(|(&a, &b)| to_u8(a as f64 + amount * (a as f64 - b as f64)))
        .collect();
    Frame::new(frame.height(), frame.width(), data).expect("dimensions preserved")
}

/// Bilinear resize to `scale` of each side and back again.
pub fn downsample_cycle(frame: &Frame, scale: f64) -> Frame {
    let (h, w) = frame.dims();
    let sh = ((h as f64 * scale).round() as usize).max(1);
    let sw = ((w as f64 * scale).round() as usize).max(1);
    if (sh, sw) == (h, w) {
        return frame.clone();
    }
    let small = resize_frame(frame, sh, sw);
    resize_frame(&small, h, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::laplacian_energy;

    fn test_frame() -> Frame {
        Frame::from_fn(16, 20, |i, j| {
            [
                ((i * 13 + j * 7) % 256) as u8,
                ((i * 5 + j * 29 + 40) % 256) as u8,
                ((i * j + 3) % 256) as u8,
            ]
        })
    }

    #[test]
    fn brightness_examples() {
        let f = test_frame();
        assert_eq!(adjust_brightness(&f, 1.0), f);
        assert_eq!(Lut::brightness(2.0).get(200), 255);
        assert_eq!(Lut::brightness(0.5).get(101), 50);
    }

    #[test]
    fn brightness_lut_is_monotone() {
        for theta in [0.1, 0.7, 1.0, 1.3, 3.0] {
            let t = Lut::brightness(theta);
            assert!(t.table().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn contrast_examples() {
        let f = test_frame();
        assert_eq!(adjust_contrast(&f, 1.0), f);
        for v in [0u8, 37, 128, 255] {
            let c = Frame::filled(5, 5, [v, v, v]);
            for theta in [0.7, 1.3, 2.0] {
                assert_eq!(adjust_contrast(&c, theta), c, "v={v} theta={theta}");
            }
        }
        // floor(110·2 + 100·(1 − 2)) = 120
        assert_eq!(Lut::contrast(2.0, 100.0).get(110), 120);
    }

    #[test]
    fn saturation_examples() {
        let f = test_frame();
        assert_eq!(adjust_saturation(&f, 1.0), f);
        let desat = adjust_saturation(&f, 0.0);
        let gray = rgb_to_gray(&f);
        for (px, &g) in desat.data().chunks_exact(3).zip(gray.data()) {
            assert!(px.iter().all(|&v| v == g));
        }
        let g = Frame::from_fn(6, 6, |i, j| {
            let v = (i * 40 + j) as u8;
            [v, v, v]
        });
        for theta in [0.7, 1.3] {
            let out = adjust_saturation(&g, theta);
            for (a, b) in out.data().iter().zip(g.data()) {
                assert!((*a as i32 - *b as i32).abs() <= 1);
            }
        }
    }

    #[test]
    fn jitter_composition() {
        let f = test_frame();
        assert_eq!(color_jitter(&f, 1.0, 1.0, 1.0), f);
        assert_eq!(color_jitter(&f, 0.8, 1.0, 1.0), adjust_brightness(&f, 0.8));
        let seq = adjust_saturation(&adjust_contrast(&adjust_brightness(&f, 1.2), 0.9), 1.1);
        assert_eq!(color_jitter(&f, 1.2, 0.9, 1.1), seq);
    }

    #[test]
    fn iso_noise_contract() {
        let f = test_frame();
        assert_eq!(iso_noise(&f, 0.0, 3), f);
        assert_eq!(iso_noise(&f, 5.0, 3), iso_noise(&f, 5.0, 3));
        assert_ne!(iso_noise(&f, 5.0, 3), iso_noise(&f, 5.0, 4));

        let mid = Frame::filled(64, 64, [128, 128, 128]);
        let noisy = iso_noise(&mid, 8.0, 17);
        let diffs: Vec<f64> = noisy
            .data()
            .iter()
            .map(|&v| v as f64 - 128.0)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(n >= 1e4);
        assert!((4.0..=10.0).contains(&std), "std={std}");
    }

    #[test]
    fn sharpen_and_downsample_identities() {
        let f = test_frame();
        assert_eq!(sharpen(&f, 0.0), f);
        // round(16·0.98) = 16 and round(20·0.98) = 20
        assert_eq!(downsample_cycle(&f, 0.98), f);
    }

    #[test]
    fn downsample_removes_checkerboard_energy() {
        let board = Frame::from_fn(32, 32, |i, j| if (i + j) % 2 == 0 { [255; 3] } else { [0; 3] });
        let before = laplacian_energy(&rgb_to_gray(&board).to_plane());
        let after = laplacian_energy(&rgb_to_gray(&downsample_cycle(&board, 0.5)).to_plane());
        assert!(after < before, "{after} !< {before}");
    }
}
