//! Synthetic talking-head clips with 68-point landmarks, for tests and demos.
//!
//! The face is a textured ellipse with darker eyes, brows and mouth drawn
//! over a smooth background. It drifts slowly so consecutive frames differ
//! by sub-pixel motion, like a cropped face track.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::media::{to_u8, Clip, Frame, Landmarks, Point};

/// Landmarks of a frontal face in unit coordinates, centred at the origin
/// with the jaw reaching `y = 0.5`.
pub fn canonical_landmarks() -> Vec<Point> {
    let mut pts = Vec::with_capacity(68);
    // jaw: lower half of an ellipse, from the left temple round to the right
    for k in 0..17 {
        let a = std::f64::consts::PI * (k as f64 / 16.0);
        pts.push(Point::new(-0.42 * a.cos(), -0.05 + 0.55 * a.sin()));
    }
    // brows
    for side in [-1.0, 1.0] {
        for k in 0..5 {
            let t = k as f64 / 4.0;
            let x = if side < 0.0 { -0.34 + 0.26 * t } else { 0.08 + 0.26 * t };
            let arch = 0.04 * (std::f64::consts::PI * t).sin();
            pts.push(Point::new(x, -0.22 - arch));
        }
    }
    // nose bridge then nostrils
    for k in 0..4 {
        pts.push(Point::new(0.0, -0.12 + 0.06 * k as f64));
    }
    for k in 0..5 {
        pts.push(Point::new(-0.08 + 0.04 * k as f64, 0.1 + 0.02 * (1.0 - ((k as f64 - 2.0).abs() / 2.0))));
    }
    // eyes: six points each, clockwise from the outer corner
    for cx in [-0.19, 0.19] {
        let (w, h) = (0.08, 0.03);
        let ring = [(-1.0, 0.0), (-0.4, -1.0), (0.4, -1.0), (1.0, 0.0), (0.4, 1.0), (-0.4, 1.0)];
        for (dx, dy) in ring {
            pts.push(Point::new(cx + w * dx, -0.1 + h * dy));
        }
    }
    // outer lip (12) and inner lip (8)
    for k in 0..12 {
        let a = std::f64::consts::PI * (1.0 - k as f64 / 6.0);
        pts.push(Point::new(0.16 * a.cos(), 0.26 - 0.07 * a.sin()));
    }
    for k in 0..8 {
        let a = std::f64::consts::PI * (1.0 - k as f64 / 4.0);
        pts.push(Point::new(0.1 * a.cos(), 0.26 - 0.03 * a.sin()));
    }
    pts
}

/// Smooth value noise on a `cell`-pixel lattice.
struct ValueNoise {
    lattice: Vec<f64>,
    n: usize,
    cell: f64,
}

impl ValueNoise {
    fn new(rng: &mut ChaCha8Rng, n: usize, cell: f64) -> Self {
        Self {
            lattice: (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            n,
            cell,
        }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        let (u, v) = (x / self.cell, y / self.cell);
        let (i, j) = (u.floor(), v.floor());
        let (fu, fv) = (u - i, v - j);
        let (fu, fv) = (fu * fu * (3.0 - 2.0 * fu), fv * fv * (3.0 - 2.0 * fv));
        let n = self.n as i64;
        let g = |a: f64, b: f64| {
            let a = (a as i64).rem_euclid(n) as usize;
            let b = (b as i64).rem_euclid(n) as usize;
            self.lattice[b * self.n + a]
        };
        let top = g(i, j) * (1.0 - fu) + g(i + 1.0, j) * fu;
        let bot = g(i, j + 1.0) * (1.0 - fu) + g(i + 1.0, j + 1.0) * fu;
        top * (1.0 - fv) + bot * fv
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceFixture {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    /// Peak drift of the face in pixels over the clip.
    pub drift: f64,
    pub seed: u64,
}

impl Default for FaceFixture {
    fn default() -> Self {
        Self {
            frames: 8,
            height: 96,
            width: 96,
            drift: 1.5,
            seed: 7,
        }
    }
}

fn dist_to_region(p: Point, region: &[Point]) -> f64 {
    region
        .iter()
        .map(|q| ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

impl FaceFixture {
    pub fn landmarks_at(&self, t: usize) -> Landmarks {
        let (dx, dy) = self.offset(t);
        let s = self.height.min(self.width) as f64 * 0.8;
        let (cx, cy) = (self.width as f64 / 2.0, self.height as f64 / 2.0);
        let pts = canonical_landmarks()
            .into_iter()
            .map(|p| Point::new(cx + dx + s * p.x, cy + dy + s * p.y))
            .collect();
        Landmarks::new(pts).expect("template has 68 finite points")
    }

    fn offset(&self, t: usize) -> (f64, f64) {
        let phase = t as f64 / self.frames.max(2) as f64 * std::f64::consts::TAU;
        (self.drift * phase.sin(), 0.5 * self.drift * (phase * 0.5).sin())
    }

    pub fn build(&self) -> Result<Clip> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let skin_tex = ValueNoise::new(&mut rng, 32, 3.0);
        let fine_tex = ValueNoise::new(&mut rng, 64, 1.3);
        let back_tex = ValueNoise::new(&mut rng, 16, 11.0);
        let s = self.height.min(self.width) as f64 * 0.8;
        let template: Vec<Point> = canonical_landmarks()
            .into_iter()
            .map(|p| Point::new(p.x * s, p.y * s))
            .collect();
        let brows = &template[17..27];
        let eyes = &template[36..48];
        let mouth = &template[48..60];
        let (cx, cy) = (self.width as f64 / 2.0, self.height as f64 / 2.0);
        let (rx, ry) = (0.44 * s, 0.6 * s);

        let mut frames = Vec::with_capacity(self.frames);
        let mut landmarks = Vec::with_capacity(self.frames);
        for t in 0..self.frames {
            let (dx, dy) = self.offset(t);
            let frame = Frame::from_fn(self.height, self.width, |i, j| {
                let (x, y) = (j as f64 - cx - dx, i as f64 - cy - dy);
                let back = 90.0 + 25.0 * back_tex.at(j as f64, i as f64) + 0.15 * i as f64;
                let r = (x / rx).powi(2) + ((y - 0.02 * s) / ry).powi(2);
                let face = (1.0 - r).clamp(0.0, 0.05) / 0.05;
                let tex = 12.0 * skin_tex.at(x + 500.0, y + 500.0) + 6.0 * fine_tex.at(x + 500.0, y + 500.0);
                let mut skin = [205.0 + tex, 160.0 + tex, 135.0 + tex];
                let p = Point::new(x, y);
                let soft = |d: f64, w: f64| (1.0 - d / w).clamp(0.0, 1.0);
                let brow = soft(dist_to_region(p, brows), 0.025 * s);
                let eye = soft(dist_to_region(p, eyes), 0.03 * s);
                let lip = soft(dist_to_region(p, mouth), 0.035 * s);
                for (c, v) in skin.iter_mut().enumerate() {
                    let dark = [70.0, 55.0, 45.0][c];
                    let red = [170.0, 70.0, 80.0][c];
                    *v = *v * (1.0 - brow) + dark * brow;
                    *v = *v * (1.0 - eye) + 40.0 * eye;
                    *v = *v * (1.0 - lip) + red * lip;
                }
                let bg = [back * 0.8, back * 0.9, back + 20.0];
                std::array::from_fn(|c| to_u8(bg[c] * (1.0 - face) + skin[c] * face))
            });
            frames.push(frame);
            landmarks.push(self.landmarks_at(t));
        }
        Clip::new(frames, landmarks, format!("synthetic_{}", self.seed))
    }
}

/// Default synthetic clip: 8 frames of 96×96.
pub fn synthetic_clip(seed: u64) -> Clip {
    FaceFixture {
        seed,
        ..Default::default()
    }
    .build()
    .expect("fixture parameters are valid")
}
