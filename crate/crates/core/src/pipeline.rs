//! Clip-level generation: parameters, edit, mask, blend for every frame.
//!
//! Parameters are drawn sequentially from the clip's [`Rpg`]; frames are then
//! processed in parallel. Output never depends on thread scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blend::{composite, effective_matte};
use crate::editor::edit_frame;
use crate::error::{Error, Result};
use crate::mask::{build_mask, finalize_mask, Mask};
use crate::media::{load_clip, save_clip, Clip, Frame, Landmarks, MIN_PIPELINE_SIDE};
use crate::rpg::{ParamSet, Rpg, RpgConfig, Trace};

/// Class label of untouched input clips.
pub const LABEL_REAL: u8 = 0;
/// Class label of generated clips (same as genuine forgeries).
pub const LABEL_PFAKE: u8 = 1;

pub fn labels() -> (u8, u8) {
    (LABEL_REAL, LABEL_PFAKE)
}

#[derive(Debug, Clone)]
pub struct PfakeOutput {
    pub clip: Clip,
    pub trace: Trace,
    /// Effective matte used for each frame.
    pub mattes: Vec<Mask>,
}

/// One frame through editor, mask generator and blender. Returns the
/// blended frame and its effective matte.
pub fn process_frame(frame: &Frame, landmarks: &Landmarks, params: &ParamSet) -> Result<(Frame, Mask)> {
    let (h, w) = frame.dims();
    let edited = edit_frame(frame, landmarks, &params.editor)?;
    let mask = finalize_mask(&build_mask(landmarks, params.mask.kind, h, w)?, &params.mask);
    let out = composite(frame, &edited, &mask, params.mask.soften, &params.blend)?;
    Ok((out, effective_matte(&mask, &params.blend)))
}

fn check_clip(clip: &Clip) -> Result<()> {
    if clip.height() < MIN_PIPELINE_SIDE || clip.width() < MIN_PIPELINE_SIDE {
        return Err(Error::InvalidClip(format!(
            "frames are {}x{}, pipeline needs at least {MIN_PIPELINE_SIDE}x{MIN_PIPELINE_SIDE}",
            clip.height(),
            clip.width()
        )));
    }
    Ok(())
}

/// Replays a trace over a clip.
pub fn apply_trace(clip: &Clip, trace: &Trace) -> Result<PfakeOutput> {
    check_clip(clip)?;
    if trace.params.len() != clip.len() {
        return Err(Error::CountMismatch {
            frames: clip.len(),
            landmarks: trace.params.len(),
        });
    }
    let results: Vec<(Frame, Mask)> = clip
        .frames()
        .par_iter()
        .zip(clip.landmarks().par_iter())
        .zip(trace.params.par_iter())
        .enumerate()
        .map(|(index, ((frame, landmarks), params))| {
            process_frame(frame, landmarks, params).map_err(|e| Error::FrameFailure {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let (frames, mattes): (Vec<Frame>, Vec<Mask>) = results.into_iter().unzip();
    Ok(PfakeOutput {
        clip: clip.with_frames(frames)?,
        trace: trace.clone(),
        mattes,
    })
}

pub fn generate_pfake_with(clip: &Clip, seed: u64, config: &RpgConfig) -> Result<PfakeOutput> {
    config.validate()?;
    check_clip(clip)?;
    let params = Rpg::new(seed, config.clone()).sample_clip_params(clip.len());
    apply_trace(clip, &Trace::new(seed, params))
}

/// Generates a pseudo-fake clip with default sampling ranges.
pub fn generate_pfake(clip: &Clip, seed: u64) -> Result<(Clip, Trace)> {
    let out = generate_pfake_with(clip, seed, &RpgConfig::default())?;
    Ok((out.clip, out.trace))
}

/// First 8 bytes (little-endian) of SHA-256 over the master seed (LE) and
/// the UTF-8 source id.
pub fn derive_clip_seed(master_seed: u64, source_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(source_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 is 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub frame_dir: PathBuf,
    pub landmark_file: PathBuf,
    pub source_id: String,
}

/// Parses a manifest; relative paths are resolved against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>> {
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
    Ok(entries
        .into_iter()
        .map(|mut e| {
            if e.frame_dir.is_relative() {
                e.frame_dir = base_dir.join(&e.frame_dir);
            }
            if e.landmark_file.is_relative() {
                e.landmark_file = base_dir.join(&e.landmark_file);
            }
            e
        })
        .collect())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipSuccess {
    pub source_id: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipFailure {
    pub source_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchReport {
    pub master_seed: u64,
    pub succeeded: Vec<ClipSuccess>,
    pub failed: Vec<ClipFailure>,
}

impl BatchReport {
    pub fn is_empty(&self) -> bool {
        self.succeeded.is_empty() && self.failed.is_empty()
    }
}

fn valid_source_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && !id.contains(['/', '\\'])
}

fn run_entry(entry: &ManifestEntry, master_seed: u64, out_root: &Path, config: &RpgConfig) -> Result<ClipSuccess> {
    if !valid_source_id(&entry.source_id) {
        return Err(Error::InvalidParameter(format!(
            "source_id `{}` cannot be used as a directory name",
            entry.source_id
        )));
    }
    let clip = load_clip(&entry.frame_dir, &entry.landmark_file)?;
    let seed = derive_clip_seed(master_seed, &entry.source_id);
    let out = generate_pfake_with(&clip, seed, config)?;
    let out_dir = out_root.join(&entry.source_id);
    save_clip(&out.clip, &out_dir, &out.trace)?;
    Ok(ClipSuccess {
        source_id: entry.source_id.clone(),
        seed,
        out_dir,
        frames: out.clip.len(),
    })
}

/// Generates every manifest entry into `out_root/<source_id>/`. Failures are
/// recorded per clip and never stop the batch.
pub fn generate_batch(
    manifest: &[ManifestEntry],
    master_seed: u64,
    out_root: &Path,
    config: &RpgConfig,
) -> BatchReport {
    let outcomes: Vec<std::result::Result<ClipSuccess, ClipFailure>> = manifest
        .par_iter()
        .map(|entry| {
            run_entry(entry, master_seed, out_root, config).map_err(|e| ClipFailure {
                source_id: entry.source_id.clone(),
                error: e.to_string(),
            })
        })
        .collect();
    let mut report = BatchReport {
        master_seed,
        ..Default::default()
    };
    for o in outcomes {
        match o {
            Ok(s) => report.succeeded.push(s),
            Err(f) => report.failed.push(f),
        }
    }
    report
}
