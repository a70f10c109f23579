//! Spectral perturbation: every orthonormal DCT coefficient of every channel
//! is shifted by `2·sigmoid(n) − 1` with `n ~ N(0, 1 + strength)`.
//!
//! Channels are transformed on the 0..255 scale, so the shift is expressed
//! in 8-bit units.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dct::{dct2, idct2};
use crate::media::{Frame, Plane};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `2·sigmoid(n) − 1`, always inside (−1, 1).
#[inline]
pub fn perturbation(noise: f64) -> f64 {
    2.0 * sigmoid(noise) - 1.0
}

/// Per-channel coefficient noise, R then G then B, each row-major, with
/// standard deviation `1 + strength`.
pub fn spectral_noise(height: usize, width: usize, strength: f64, seed: u64) -> [Plane; 3] {
    let normal = Normal::new(0.0, 1.0 + strength).expect("finite non-negative strength");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| {
        let data = (0..height * width).map(|_| normal.sample(&mut rng)).collect();
        Plane::new(height, width, data).expect("sized above")
    })
}

/// Applies a given coefficient noise field. Exposed so the transform can be
/// exercised with a chosen field (e.g. all zeros).
pub fn freq_perturb_with_noise(frame: &Frame, noise: &[Plane; 3]) -> Frame {
    let planes = frame.to_planes();
    let out: Vec<Plane> = planes
        .iter()
        .zip(noise)
        .map(|(channel, n)| {
            let mut coeffs = dct2(channel);
            for (c, &d) in coeffs.data.iter_mut().zip(n.data()) {
                *c += perturbation(d);
            }
            idct2(&coeffs)
        })
        .collect();
    let out: [Plane; 3] = out.try_into().expect("three channels");
    Frame::from_planes(&out)
}

pub fn freq_perturb(frame: &Frame, strength: f64, seed: u64) -> Frame {
    let noise = spectral_noise(frame.height(), frame.width(), strength, seed);
    freq_perturb_with_noise(frame, &noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_round_trips() {
        let f = Frame::from_fn(23, 31, |i, j| [(i * 11 % 256) as u8, (j * 8) as u8, ((i + j) * 3) as u8]);
        let zero: [Plane; 3] = std::array::from_fn(|_| Plane::zeros(23, 31));
        let out = freq_perturb_with_noise(&f, &zero);
        for (a, b) in out.data().iter().zip(f.data()) {
            assert!((*a as i32 - *b as i32).abs() <= 1);
        }
    }

    #[test]
    fn perturbation_is_bounded() {
        for x in [-1e6, -30.0, -1.0, 0.0, 0.5, 30.0, 1e6] {
            let p = perturbation(x);
            assert!((-1.0..=1.0).contains(&p));
        }
        assert_eq!(perturbation(0.0), 0.0);
        for x in [-5.0, -0.3, 0.3, 5.0] {
            let p = perturbation(x);
            assert!(p > -1.0 && p < 1.0);
        }
    }

    #[test]
    fn seeded_and_changes_something() {
        let f = Frame::filled(16, 16, [120, 90, 60]);
        let a = freq_perturb(&f, 1.0, 4);
        assert_eq!(a, freq_perturb(&f, 1.0, 4));
        assert_ne!(a, f);
    }
}
