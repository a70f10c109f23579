//! Random parameter generation and the replayable parameter trace.
//!
//! Every clip gets an [`Rpg`] built from a 64-bit seed. Frames are cut into
//! contiguous segments whose lengths are drawn uniformly from
//! `1..=max_segment_len`; every frame of a segment shares one [`ParamSet`].
//! Segment lengths come from a layout stream and each segment's parameters
//! come from their own ChaCha stream, so the draws for segment `k` depend
//! only on `(seed, k)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRACE_SCHEMA: &str = "pfake-trace/v1";

/// Closed sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        self.min + (self.max - self.min) * rng.random::<f64>()
    }
}

/// Sampling ranges and probabilities. Every field can be overridden from a
/// config file; missing fields keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RpgConfig {
    pub brightness: Range,
    pub contrast: Range,
    pub saturation: Range,
    pub iso_sigma: Range,
    pub sharpen_amount: Range,
    pub down_scale: Range,
    pub elastic_sigma: Range,
    pub elastic_alpha: Range,
    pub dense_warp_amp: Range,
    pub tri_jitter: Range,
    pub freq_strength: Range,
    pub mask_deform_sigma: Range,
    pub mask_deform_alpha: Range,
    pub alpha_scale: Range,
    /// Chance that each optional edit is enabled.
    pub edit_probability: f64,
    /// Chance of drawing the mask from the face group
    /// (whole face, narrowed face, face with forehead).
    pub face_group_probability: f64,
    pub max_segment_len: usize,
}

impl Default for RpgConfig {
    fn default() -> Self {
        Self {
            brightness: Range::new(0.7, 1.3),
            contrast: Range::new(0.7, 1.3),
            saturation: Range::new(0.7, 1.3),
            iso_sigma: Range::new(2.0, 10.0),
            sharpen_amount: Range::new(0.3, 1.0),
            down_scale: Range::new(0.25, 0.75),
            elastic_sigma: Range::new(4.0, 8.0),
            elastic_alpha: Range::new(10.0, 40.0),
            dense_warp_amp: Range::new(2.0, 8.0),
            tri_jitter: Range::new(1.0, 4.0),
            freq_strength: Range::new(0.0, 2.0),
            mask_deform_sigma: Range::new(4.0, 8.0),
            mask_deform_alpha: Range::new(10.0, 40.0),
            alpha_scale: Range::new(0.5, 1.0),
            edit_probability: 0.30,
            face_group_probability: 0.75,
            max_segment_len: 8,
        }
    }
}

impl RpgConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        let ranges = [
            ("brightness", self.brightness),
            ("contrast", self.contrast),
            ("saturation", self.saturation),
            ("iso_sigma", self.iso_sigma),
            ("sharpen_amount", self.sharpen_amount),
            ("down_scale", self.down_scale),
            ("elastic_sigma", self.elastic_sigma),
            ("elastic_alpha", self.elastic_alpha),
            ("dense_warp_amp", self.dense_warp_amp),
            ("tri_jitter", self.tri_jitter),
            ("freq_strength", self.freq_strength),
            ("mask_deform_sigma", self.mask_deform_sigma),
            ("mask_deform_alpha", self.mask_deform_alpha),
            ("alpha_scale", self.alpha_scale),
        ];
        for (name, r) in ranges {
            if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max && r.min >= 0.0) {
                return bad(&format!("{name}: range [{}, {}] is invalid", r.min, r.max));
            }
        }
        for (name, r) in [
            ("brightness", self.brightness),
            ("contrast", self.contrast),
            ("saturation", self.saturation),
            ("elastic_sigma", self.elastic_sigma),
            ("mask_deform_sigma", self.mask_deform_sigma),
        ] {
            if r.min <= 0.0 {
                return bad(&format!("{name}: must be strictly positive"));
            }
        }
        if self.down_scale.min <= 0.0 || self.down_scale.max >= 1.0 {
            return bad("down_scale: must lie inside (0, 1)");
        }
        if self.alpha_scale.max > 1.0 {
            return bad("alpha_scale: must not exceed 1");
        }
        for (name, p) in [
            ("edit_probability", self.edit_probability),
            ("face_group_probability", self.face_group_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name}: probability {p} outside [0, 1]"));
            }
        }
        if self.max_segment_len == 0 {
            return bad("max_segment_len: must be at least 1");
        }
        Ok(())
    }
}

/// Brightness, contrast and saturation factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Jitter {
    #[serde(rename = "theta_b")]
    pub brightness: f64,
    #[serde(rename = "theta_t")]
    pub contrast: f64,
    #[serde(rename = "theta_a")]
    pub saturation: f64,
}

impl Jitter {
    pub const IDENTITY: Jitter = Jitter {
        brightness: 1.0,
        contrast: 1.0,
        saturation: 1.0,
    };
}

/// Which optional edits run. Color jitter always runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditFlags {
    pub iso_noise: bool,
    pub sharpen: bool,
    pub downsample: bool,
    pub elastic: bool,
    pub dense_warp: bool,
    pub tri_stretch: bool,
    pub freq_perturb: bool,
}

impl EditFlags {
    pub const NONE: EditFlags = EditFlags {
        iso_noise: false,
        sharpen: false,
        downsample: false,
        elastic: false,
        dense_warp: false,
        tri_stretch: false,
        freq_perturb: false,
    };

    pub fn as_array(&self) -> [bool; 7] {
        [
            self.iso_noise,
            self.sharpen,
            self.downsample,
            self.elastic,
            self.dense_warp,
            self.tri_stretch,
            self.freq_perturb,
        ]
    }

    pub const NAMES: [&'static str; 7] = [
        "iso_noise",
        "sharpen",
        "downsample",
        "elastic",
        "dense_warp",
        "tri_stretch",
        "freq_perturb",
    ];
}

/// Displacement smoothing and amplitude, plus the noise seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticParams {
    #[serde(rename = "theta_sigma")]
    pub sigma: f64,
    #[serde(rename = "theta_alpha")]
    pub alpha: f64,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditorParams {
    pub jitter: Jitter,
    pub enabled: EditFlags,
    pub iso_sigma: f64,
    pub iso_seed: u64,
    pub sharpen_amount: f64,
    pub down_scale: f64,
    pub elastic: ElasticParams,
    pub dense_warp_amp: f64,
    pub dense_warp_seed: u64,
    pub tri_jitter: f64,
    pub tri_seed: u64,
    #[serde(rename = "theta_f")]
    pub freq_strength: f64,
    pub freq_seed: u64,
}

impl EditorParams {
    /// Every optional edit off and neutral jitter.
    pub fn identity() -> Self {
        Self {
            jitter: Jitter::IDENTITY,
            enabled: EditFlags::NONE,
            iso_sigma: 0.0,
            iso_seed: 0,
            sharpen_amount: 0.0,
            down_scale: 0.5,
            elastic: ElasticParams {
                sigma: 4.0,
                alpha: 0.0,
                noise_seed: 0,
            },
            dense_warp_amp: 0.0,
            dense_warp_seed: 0,
            tri_jitter: 0.0,
            tri_seed: 0,
            freq_strength: 0.0,
            freq_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        let j = self.jitter;
        if !(j.brightness > 0.0 && j.contrast > 0.0 && j.saturation > 0.0) {
            return bad("jitter factors must be positive");
        }
        let finite = [
            j.brightness,
            j.contrast,
            j.saturation,
            self.iso_sigma,
            self.sharpen_amount,
            self.down_scale,
            self.elastic.sigma,
            self.elastic.alpha,
            self.dense_warp_amp,
            self.tri_jitter,
            self.freq_strength,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("editor parameters must be finite");
        }
        if self.freq_strength < 0.0 {
            return bad("theta_f must be non-negative");
        }
        if !(self.down_scale > 0.0 && self.down_scale < 1.0) {
            return bad("down_scale must lie inside (0, 1)");
        }
        if self.elastic.sigma <= 0.0 || self.elastic.alpha < 0.0 {
            return bad("elastic sigma must be positive and alpha non-negative");
        }
        if self.iso_sigma < 0.0
            || self.sharpen_amount < 0.0
            || self.dense_warp_amp < 0.0
            || self.tri_jitter < 0.0
        {
            return bad("noise, sharpen and warp amplitudes must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskKind {
    WholeFace,
    NarrowedFace,
    FaceWithForehead,
    FaceBoundary,
    MouthRegion,
    FacialOrgans,
}

impl MaskKind {
    pub const ALL: [MaskKind; 6] = [
        MaskKind::WholeFace,
        MaskKind::NarrowedFace,
        MaskKind::FaceWithForehead,
        MaskKind::FaceBoundary,
        MaskKind::MouthRegion,
        MaskKind::FacialOrgans,
    ];
    pub const FACE_GROUP: [MaskKind; 3] = [
        MaskKind::WholeFace,
        MaskKind::NarrowedFace,
        MaskKind::FaceWithForehead,
    ];
    pub const PART_GROUP: [MaskKind; 3] = [
        MaskKind::FaceBoundary,
        MaskKind::MouthRegion,
        MaskKind::FacialOrgans,
    ];

    pub fn is_face_group(self) -> bool {
        Self::FACE_GROUP.contains(&self)
    }

    pub fn name(self) -> &'static str {
        match self {
            MaskKind::WholeFace => "whole-face",
            MaskKind::NarrowedFace => "narrowed-face",
            MaskKind::FaceWithForehead => "face-with-forehead",
            MaskKind::FaceBoundary => "face-boundary",
            MaskKind::MouthRegion => "mouth-region",
            MaskKind::FacialOrgans => "facial-organs",
        }
    }
}

impl std::str::FromStr for MaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mask kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SoftenSide {
    None,
    Foreground,
    Background,
}

pub const KERNEL_SIZES: [usize; 5] = [3, 5, 7, 9, 11];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskParams {
    pub kind: MaskKind,
    pub deform: ElasticParams,
    #[serde(rename = "theta_k")]
    pub kernel_size: usize,
    pub soften: SoftenSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlendMethod {
    Alpha,
    ScaledAlpha,
    Hard,
}

/// `alpha_scale` only takes effect with [`BlendMethod::ScaledAlpha`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlendParams {
    pub method: BlendMethod,
    pub alpha_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSet {
    pub editor: EditorParams,
    pub mask: MaskParams,
    pub blend: BlendParams,
    pub segment_id: usize,
}

impl ParamSet {
    /// All edits off, neutral jitter, plain alpha blend, no softening.
    pub fn identity() -> Self {
        Self {
            editor: EditorParams::identity(),
            mask: MaskParams {
                kind: MaskKind::WholeFace,
                deform: ElasticParams {
                    sigma: 4.0,
                    alpha: 0.0,
                    noise_seed: 0,
                },
                kernel_size: 3,
                soften: SoftenSide::None,
            },
            blend: BlendParams {
                method: BlendMethod::Alpha,
                alpha_scale: 1.0,
            },
            segment_id: 0,
        }
    }
}

/// Replayable record of one generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trace {
    pub schema: String,
    pub seed: u64,
    pub params: Vec<ParamSet>,
}

impl Trace {
    pub fn new(seed: u64, params: Vec<ParamSet>) -> Self {
        Self {
            schema: TRACE_SCHEMA.to_string(),
            seed,
            params,
        }
    }

    pub fn to_document(&self) -> String {
        serialize_trace(self)
    }
}

pub fn serialize_trace(trace: &Trace) -> String {
    serde_json::to_string_pretty(trace).expect("trace always serializes")
}

pub fn parse_trace(document: &str) -> Result<Trace> {
    let trace: Trace =
        serde_json::from_str(document).map_err(|e| Error::Parse(format!("trace: {e}")))?;
    if trace.schema != TRACE_SCHEMA {
        return Err(Error::Parse(format!(
            "trace: unsupported schema `{}`",
            trace.schema
        )));
    }
    Ok(trace)
}

/// Seeded random parameter generator.
#[derive(Debug, Clone)]
pub struct Rpg {
    seed: u64,
    config: RpgConfig,
    layout: ChaCha8Rng,
    next_stream: u64,
}

pub fn make_rpg(seed: u64) -> Rpg {
    Rpg::new(seed, RpgConfig::default())
}

impl Rpg {
    pub fn new(seed: u64, config: RpgConfig) -> Self {
        let mut layout = ChaCha8Rng::seed_from_u64(seed);
        layout.set_stream(0);
        Self {
            seed,
            config,
            layout,
            next_stream: 1,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &RpgConfig {
        &self.config
    }

    fn segment_rng(&mut self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.next_stream);
        self.next_stream += 1;
        rng
    }

    /// Draws one full parameter record from a fresh stream. `segment_id` is 0.
    pub fn draw_param_set(&mut self) -> ParamSet {
        let mut rng = self.segment_rng();
        draw_param_set(&self.config, &mut rng)
    }

    /// Per-frame parameters for a clip of `num_frames` frames.
    pub fn sample_clip_params(&mut self, num_frames: usize) -> Vec<ParamSet> {
        let mut out = Vec::with_capacity(num_frames);
        let mut segment_id = 0;
        while out.len() < num_frames {
            let len = self.layout.random_range(1..=self.config.max_segment_len);
            let mut params = self.draw_param_set();
            params.segment_id = segment_id;
            let take = len.min(num_frames - out.len());
            out.extend(std::iter::repeat_n(params, take));
            segment_id += 1;
        }
        out
    }
}

pub fn sample_clip_params(rpg: &mut Rpg, num_frames: usize) -> Vec<ParamSet> {
    rpg.sample_clip_params(num_frames)
}

fn draw_param_set(cfg: &RpgConfig, rng: &mut ChaCha8Rng) -> ParamSet {
    let jitter = Jitter {
        brightness: cfg.brightness.sample(rng),
        contrast: cfg.contrast.sample(rng),
        saturation: cfg.saturation.sample(rng),
    };
    let p = cfg.edit_probability;
    let mut flip = || rng.random::<f64>() < p;
    let enabled = EditFlags {
        iso_noise: flip(),
        sharpen: flip(),
        downsample: flip(),
        elastic: flip(),
        dense_warp: flip(),
        tri_stretch: flip(),
        freq_perturb: flip(),
    };
    let editor = EditorParams {
        jitter,
        enabled,
        iso_sigma: cfg.iso_sigma.sample(rng),
        iso_seed: rng.random(),
        sharpen_amount: cfg.sharpen_amount.sample(rng),
        down_scale: cfg.down_scale.sample(rng),
        elastic: ElasticParams {
            sigma: cfg.elastic_sigma.sample(rng),
            alpha: cfg.elastic_alpha.sample(rng),
            noise_seed: rng.random(),
        },
        dense_warp_amp: cfg.dense_warp_amp.sample(rng),
        dense_warp_seed: rng.random(),
        tri_jitter: cfg.tri_jitter.sample(rng),
        tri_seed: rng.random(),
        freq_strength: cfg.freq_strength.sample(rng),
        freq_seed: rng.random(),
    };

    let kind = if rng.random::<f64>() < cfg.face_group_probability {
        MaskKind::FACE_GROUP[rng.random_range(0..3)]
    } else {
        MaskKind::PART_GROUP[rng.random_range(0..3)]
    };
    let mask = MaskParams {
        kind,
        deform: ElasticParams {
            sigma: cfg.mask_deform_sigma.sample(rng),
            alpha: cfg.mask_deform_alpha.sample(rng),
            noise_seed: rng.random(),
        },
        kernel_size: KERNEL_SIZES[rng.random_range(0..KERNEL_SIZES.len())],
        soften: [SoftenSide::None, SoftenSide::Foreground, SoftenSide::Background]
            [rng.random_range(0..3)],
    };

    let blend = BlendParams {
        method: [BlendMethod::Alpha, BlendMethod::ScaledAlpha, BlendMethod::Hard]
            [rng.random_range(0..3)],
        alpha_scale: cfg.alpha_scale.sample(rng),
    };

    ParamSet {
        editor,
        mask,
        blend,
        segment_id: 0,
    }
}
