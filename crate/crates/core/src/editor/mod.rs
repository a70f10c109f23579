//! Frame editing driven by [`EditorParams`].
//!
//! [`edit_frame`] runs the enabled edits in a fixed order:
//! downsample cycle, color jitter (always), ISO noise, sharpen, elastic
//! transform, dense warp, triangular stretch, frequency perturbation.

mod frequency;
mod geometric;
mod photometric;

pub use frequency::{freq_perturb, freq_perturb_with_noise, perturbation, sigmoid, spectral_noise};
pub use geometric::{
    border_anchors, dense_warp, elastic_transform, triangular_stretch, warp_triangles,
    DisplacementField, Remap, TrianglePair, DENSE_GRID,
};
pub use photometric::{
    adjust_brightness, adjust_contrast, adjust_saturation, color_jitter, downsample_cycle,
    iso_noise, sharpen, Lut, SHARPEN_KERNEL,
};

use crate::error::Result;
use crate::media::{Frame, Landmarks};
use crate::rpg::EditorParams;

pub fn edit_frame(frame: &Frame, landmarks: &Landmarks, params: &EditorParams) -> Result<Frame> {
    params.validate()?;
    let on = params.enabled;
    let mut f = if on.downsample {
        downsample_cycle(frame, params.down_scale)
    } else {
        frame.clone()
    };
    let j = params.jitter;
    f = color_jitter(&f, j.brightness, j.contrast, j.saturation);
    if on.iso_noise {
        f = iso_noise(&f, params.iso_sigma, params.iso_seed);
    }
    if on.sharpen {
        f = sharpen(&f, params.sharpen_amount);
    }
    if on.elastic {
        let e = params.elastic;
        f = elastic_transform(&f, e.sigma, e.alpha, e.noise_seed);
    }
    if on.dense_warp {
        f = dense_warp(&f, params.dense_warp_amp, params.dense_warp_seed);
    }
    if on.tri_stretch {
        f = triangular_stretch(&f, landmarks, params.tri_jitter, params.tri_seed)?;
    }
    if on.freq_perturb {
        f = freq_perturb(&f, params.freq_strength, params.freq_seed);
    }
    Ok(f)
}
