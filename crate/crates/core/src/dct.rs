//! Orthonormal 2-D DCT-II and its inverse (DCT-III) over whole planes.
//!
//! Backed by `rustdct`; the unnormalized transforms are rescaled so that
//! the basis is orthonormal and `idct2(dct2(x)) == x` up to rounding.

use std::sync::Arc;

use rustdct::{Dct2, Dct3, DctPlanner};

use crate::media::Plane;

struct Axis {
    forward: Arc<dyn Dct2<f64>>,
    inverse: Arc<dyn Dct3<f64>>,
    n: usize,
}

impl Axis {
    fn new(planner: &mut DctPlanner<f64>, n: usize) -> Self {
        Self {
            forward: planner.plan_dct2(n),
            inverse: planner.plan_dct3(n),
            n,
        }
    }

    fn forward(&self, buf: &mut [f64]) {
        self.forward.process_dct2(buf);
        let n = self.n as f64;
        let s0 = (1.0 / n).sqrt();
        let s = (2.0 / n).sqrt();
        buf[0] *= s0;
        buf[1..].iter_mut().for_each(|v| *v *= s);
    }

    fn inverse(&self, buf: &mut [f64]) {
        // rustdct's DCT-III computes x_n = X_0/2 + sum_k X_k cos(..)
        let n = self.n as f64;
        buf[0] *= 2.0 * (1.0 / n).sqrt();
        let s = (2.0 / n).sqrt();
        buf[1..].iter_mut().for_each(|v| *v *= s);
        self.inverse.process_dct3(buf);
    }
}

fn transform(src: &Plane, inverse: bool) -> Plane {
    let (h, w) = src.dims();
    let mut planner = DctPlanner::new();
    let rows = Axis::new(&mut planner, w);
    let cols = Axis::new(&mut planner, h);

    let mut data = src.data().to_vec();
    for row in data.chunks_exact_mut(w) {
        if inverse {
            rows.inverse(row);
        } else {
            rows.forward(row);
        }
    }
    let mut col = vec![0.0; h];
    for j in 0..w {
        for i in 0..h {
            col[i] = data[i * w + j];
        }
        if inverse {
            cols.inverse(&mut col);
        } else {
            cols.forward(&mut col);
        }
        for i in 0..h {
            data[i * w + j] = col[i];
        }
    }
    Plane::new(h, w, data).expect("dimensions preserved")
}

/// Orthonormal type-II 2-D DCT.
pub fn dct2(plane: &Plane) -> Plane {
    transform(plane, false)
}

/// Orthonormal type-III 2-D DCT, the exact inverse of [`dct2`].
pub fn idct2(plane: &Plane) -> Plane {
    transform(plane, true)
}
