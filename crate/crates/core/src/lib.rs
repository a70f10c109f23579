//! Pseudo-fake face clip generation.
//!
//! A real clip plus its 68-point landmarks goes in; a clip that differs only
//! inside a face-shaped region comes out, along with a trace of every
//! sampled parameter so the result can be replayed exactly.
//!
//! ```no_run
//! use pfake_core::{generate_pfake, load_clip};
//! use std::path::Path;
//!
//! let clip = load_clip(Path::new("frames/"), Path::new("landmarks.json"))?;
//! let (fake, trace) = generate_pfake(&clip, 42)?;
//! # Ok::<(), pfake_core::Error>(())
//! ```

pub mod analysis;
pub mod blend;
pub mod dct;
pub mod editor;
pub mod error;
pub mod filter;
pub mod fixture;
pub mod geometry;
pub mod mask;
pub mod media;
pub mod pipeline;
pub mod rpg;
pub mod ste;

pub use error::{Error, Result};
pub use mask::{build_mask, finalize_mask, Mask};
pub use media::{load_clip, load_frames, save_clip, Clip, Frame, Landmarks, Point};
pub use pipeline::{
    apply_trace, derive_clip_seed, generate_batch, generate_pfake, generate_pfake_with,
    PfakeOutput,
};
pub use rpg::{make_rpg, sample_clip_params, MaskKind, ParamSet, Rpg, RpgConfig, Trace};
