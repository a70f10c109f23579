//! Brute-force reference implementations written straight from the
//! formulas, independent of the library code paths they check.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn gray(px: [u8; 3]) -> u8 {
    (0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

fn floor_clamp(v: f64) -> u8 {
    v.floor().clamp(0.0, 255.0) as u8
}

/// Brightness, contrast and saturation on a flat list of RGB pixels.
pub fn jitter_oracle(pixels: &[[u8; 3]], b: f64, t: f64, a: f64) -> Vec<[u8; 3]> {
    let bright: Vec<[u8; 3]> = pixels
        .iter()
        .map(|p| p.map(|k| floor_clamp(k as f64 * b)))
        .collect();
    let mu = bright.iter().map(|&p| gray(p) as f64).sum::<f64>() / bright.len() as f64;
    let contrast: Vec<[u8; 3]> = bright
        .iter()
        .map(|p| p.map(|k| floor_clamp(k as f64 * t + mu * (1.0 - t))))
        .collect();
    contrast
        .iter()
        .map(|&p| {
            let g = gray(p) as f64;
            p.map(|k| floor_clamp(k as f64 * a + g * (1.0 - a)))
        })
        .collect()
}

/// Direct 2-D Gaussian convolution with edge replication and radius ceil(3σ).
pub fn blur_direct(src: &[Vec<f64>], sigma: f64) -> Vec<Vec<f64>> {
    let h = src.len();
    let w = src[0].len();
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = raw.iter().sum();
    let k: Vec<f64> = raw.iter().map(|v| v / s).collect();
    let mut out = vec![vec![0.0; w]; h];
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for a in -r..=r {
                for b in -r..=r {
                    let ii = (i as isize + a).clamp(0, h as isize - 1) as usize;
                    let jj = (j as isize + b).clamp(0, w as isize - 1) as usize;
                    acc += k[(a + r) as usize] * k[(b + r) as usize] * src[ii][jj];
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Source (row, col) for every output pixel of the elastic transform:
/// uniform noise in (−1, 1), all row offsets first, then all column
/// offsets, blurred, scaled, floored and clamped.
pub fn elastic_indices(h: usize, w: usize, sigma: f64, alpha: f64, seed: u64) -> Vec<Vec<(usize, usize)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> Vec<Vec<f64>> {
        (0..h)
            .map(|_| (0..w).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    };
    let dx = draw();
    let dy = draw();
    let dx = blur_direct(&dx, sigma);
    let dy = blur_direct(&dy, sigma);
    (0..h)
        .map(|i| {
            (0..w)
                .map(|j| {
                    let gx = (i as f64 + dx[i][j] * alpha).floor().max(0.0).min((h - 1) as f64);
                    let gy = (j as f64 + dy[i][j] * alpha).floor().max(0.0).min((w - 1) as f64);
                    (gx as usize, gy as usize)
                })
                .collect()
        })
        .collect()
}

fn alpha_coef(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Orthonormal 2-D DCT-II by direct summation.
pub fn dct2_direct(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let h = x.len();
    let w = x[0].len();
    let mut out = vec![vec![0.0; w]; h];
    for u in 0..h {
        for v in 0..w {
            let mut acc = 0.0;
            for i in 0..h {
                for j in 0..w {
                    acc += x[i][j]
                        * (PI * (2 * i + 1) as f64 * u as f64 / (2 * h) as f64).cos()
                        * (PI * (2 * j + 1) as f64 * v as f64 / (2 * w) as f64).cos();
                }
            }
            out[u][v] = alpha_coef(u, h) * alpha_coef(v, w) * acc;
        }
    }
    out
}

/// Laplacian energy: mean |4·x − neighbours| over interior pixels.
pub fn laplacian_direct(x: &[Vec<f64>]) -> f64 {
    let h = x.len();
    let w = x[0].len();
    let mut acc = 0.0;
    let mut n = 0;
    for i in 1..h - 1 {
        for j in 1..w - 1 {
            acc += (4.0 * x[i][j] - x[i - 1][j] - x[i + 1][j] - x[i][j - 1] - x[i][j + 1]).abs();
            n += 1;
        }
    }
    acc / n as f64
}
