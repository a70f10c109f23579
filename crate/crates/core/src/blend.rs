//! Compositing of real and edited frames under a matte.

use crate::error::{Error, Result};
use crate::filter::{blur_frame, GaussianKernel};
use crate::mask::Mask;
use crate::media::{to_u8, Frame, Plane};
use crate::rpg::{BlendMethod, BlendParams, SoftenSide};

pub const SOFTEN_KERNEL: usize = 3;

/// Blurs the real frame (`Background`) or the edited frame (`Foreground`)
/// with a 3×3 Gaussian.
pub fn soften_side(real: &Frame, edited: &Frame, side: SoftenSide) -> (Frame, Frame) {
    let kernel = || GaussianKernel::from_size(SOFTEN_KERNEL);
    match side {
        SoftenSide::None => (real.clone(), edited.clone()),
        SoftenSide::Background => (blur_frame(real, &kernel()), edited.clone()),
        SoftenSide::Foreground => (real.clone(), blur_frame(edited, &kernel())),
    }
}

/// The matte actually used for mixing: the mask itself, the mask times
/// `alpha_scale`, or the mask thresholded at 0.5.
pub fn effective_matte(mask: &Mask, params: &BlendParams) -> Mask {
    let m = match params.method {
        BlendMethod::Alpha => return mask.clone(),
        BlendMethod::ScaledAlpha => {
            let s = params.alpha_scale.clamp(0.0, 1.0);
            mask.plane().map(|v| v * s)
        }
        BlendMethod::Hard => mask.plane().map(|v| if v >= 0.5 { 1.0 } else { 0.0 }),
    };
    Mask::new(m).expect("values stay in [0, 1]")
}

fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        });
    }
    Ok(())
}

fn mix(real: &Frame, edited: &Frame, matte: &Plane) -> Frame {
    let data = real
        .data()
        .chunks_exact(3)
        .zip(edited.data().chunks_exact(3))
        .zip(matte.data())
        .flat_map(|((r, e), &m)| {
            let px: [u8; 3] =
                std::array::from_fn(|c| to_u8(r[c] as f64 * (1.0 - m) + e[c] as f64 * m));
            px
        })
        .collect();
    Frame::new(real.height(), real.width(), data).expect("dimensions checked")
}

/// `round(real·(1 − m) + edited·m)` with `m` the effective matte.
pub fn blend(real: &Frame, edited: &Frame, mask: &Mask, params: &BlendParams) -> Result<Frame> {
    check_dims(real.dims(), edited.dims())?;
    check_dims(real.dims(), mask.dims())?;
    let matte = effective_matte(mask, params);
    Ok(mix(real, edited, matte.plane()))
}

/// Softening followed by blending, with every pixel whose effective matte
/// is exactly zero taken from the unsoftened real frame. Softening of
/// either layer is therefore only visible where the matte mixes it in.
pub fn composite(
    real: &Frame,
    edited: &Frame,
    mask: &Mask,
    side: SoftenSide,
    params: &BlendParams,
) -> Result<Frame> {
    check_dims(real.dims(), edited.dims())?;
    check_dims(real.dims(), mask.dims())?;
    let (soft_real, soft_edited) = soften_side(real, edited, side);
    let matte = effective_matte(mask, params);
    let mut out = mix(&soft_real, &soft_edited, matte.plane());
    let data = out.data_mut();
    for (k, &m) in matte.data().iter().enumerate() {
        if m == 0.0 {
            data[k * 3..k * 3 + 3].copy_from_slice(&real.data()[k * 3..k * 3 + 3]);
        }
    }
    Ok(out)
}
