//! Forward-pass reference of the spatio-temporal enhancement block and the
//! binary cross-entropy loss.
//!
//! Given features of shape C×L×H×W the block
//! 1. convolves every channel along time with its own 3-tap kernel
//!    (zero padding at both ends),
//! 2. for each frame, squeezes non-overlapping 7×7 patches to C/r-dim
//!    tokens, runs multi-head self-attention over the tokens, and projects
//!    them back to C channels with a pointwise convolution,
//! 3. places the tokens on their patch grid, upsamples bilinearly to H×W,
//!    and gates the temporally convolved features with the sigmoid of that
//!    map.
//!
//! Plain dense `f64` arithmetic; no training, batching or GPU support.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::resize_plane;
use crate::media::Plane;

pub const PATCH: usize = 7;
pub const REDUCTION: usize = 8;
pub const DEFAULT_HEADS: usize = 4;
pub const BCE_EPS: f64 = 1e-7;
pub const WEIGHTS_SCHEMA: &str = "pfake-ste-weights/v1";

fn shape_err(msg: impl Into<String>) -> Error {
    Error::ShapeMismatch(msg.into())
}

/// Dense C×L×H×W tensor, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    dims: [usize; 4],
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn new(dims: [usize; 4], data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.iter().product::<usize>() {
            return Err(shape_err(format!(
                "{dims:?} needs {} values, got {}",
                dims.iter().product::<usize>(),
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(shape_err("tensor contains non-finite values"));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: [usize; 4]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.iter().product()],
        }
    }

    pub fn random(dims: [usize; 4], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            dims,
            data: (0..dims.iter().product::<usize>())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, c: usize, t: usize, y: usize, x: usize) -> usize {
        let [_, l, h, w] = self.dims;
        ((c * l + t) * h + y) * w + x
    }

    #[inline]
    pub fn get(&self, c: usize, t: usize, y: usize, x: usize) -> f64 {
        self.data[self.index(c, t, y, x)]
    }

    /// The C×H×W slice at time `t`.
    pub fn frame(&self, t: usize) -> Tensor3 {
        let [c, _, h, w] = self.dims;
        let mut data = Vec::with_capacity(c * h * w);
        for ch in 0..c {
            let start = self.index(ch, t, 0, 0);
            data.extend_from_slice(&self.data[start..start + h * w]);
        }
        Tensor3 {
            dims: [c, h, w],
            data,
        }
    }

    /// Elementwise product.
    pub fn mul(&self, other: &Tensor4) -> Result<Tensor4> {
        if self.dims != other.dims {
            return Err(shape_err(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(Tensor4 {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        })
    }
}

/// Dense C×H×W tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(dims: [usize; 3], data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.iter().product::<usize>() {
            return Err(shape_err(format!("{dims:?} vs {} values", data.len())));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        let [_, h, w] = self.dims;
        self.data[(c * h + y) * w + x]
    }
}

/// Row-major matrix; rows are tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape_err(format!("{rows}x{cols} vs {} values", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self · weight + bias`, with `weight` stored input-major (in×out).
    fn affine(&self, weight: &[f64], bias: &[f64], out: usize) -> Matrix {
        debug_assert_eq!(weight.len(), self.cols * out);
        let mut m = Matrix::zeros(self.rows, out);
        for r in 0..self.rows {
            let dst = &mut m.data[r * out..(r + 1) * out];
            dst.copy_from_slice(bias);
            for (k, &x) in self.row(r).iter().enumerate() {
                for (d, &wt) in dst.iter_mut().zip(&weight[k * out..(k + 1) * out]) {
                    *d += x * wt;
                }
            }
        }
        m
    }
}

/// Query, key, value and output projections over `dim`-wide tokens,
/// each stored in×out with a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub dim: usize,
    pub heads: usize,
    pub query: Vec<f64>,
    pub query_bias: Vec<f64>,
    pub key: Vec<f64>,
    pub key_bias: Vec<f64>,
    pub value: Vec<f64>,
    pub value_bias: Vec<f64>,
    pub output: Vec<f64>,
    pub output_bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteWeights {
    pub channels: usize,
    pub reduction: usize,
    /// Per-channel taps for time offsets −1, 0, +1.
    pub temporal: Vec<[f64; 3]>,
    /// `[C/r][C][7][7]`
    pub squeeze: Vec<f64>,
    pub squeeze_bias: Vec<f64>,
    pub attention: AttentionWeights,
    /// `[C/r][C]`, input-major.
    pub point: Vec<f64>,
    pub point_bias: Vec<f64>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SteWeights {
    pub fn squeezed(&self) -> usize {
        self.channels / self.reduction
    }

    /// Deterministic uniform initialization scaled by `1/sqrt(fan_in)`.
    /// Uses `gcd(4, C/r)` heads.
    pub fn seeded(channels: usize, seed: u64) -> Result<Self> {
        if channels == 0 || !channels.is_multiple_of(REDUCTION) {
            return Err(shape_err(format!(
                "channels ({channels}) must be a positive multiple of {REDUCTION}"
            )));
        }
        let d = channels / REDUCTION;
        let heads = gcd(DEFAULT_HEADS, d);
        Self::seeded_with(channels, REDUCTION, heads, seed)
    }

    pub fn seeded_with(channels: usize, reduction: usize, heads: usize, seed: u64) -> Result<Self> {
        if reduction == 0 || !channels.is_multiple_of(reduction) || channels == 0 {
            return Err(shape_err("reduction must divide channels"));
        }
        let d = channels / reduction;
        if heads == 0 || !d.is_multiple_of(heads) {
            return Err(shape_err(format!("{heads} heads do not divide {d}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |n: usize, fan_in: usize| -> Vec<f64> {
            let a = 1.0 / (fan_in as f64).sqrt();
            (0..n).map(|_| rng.random_range(-a..a)).collect()
        };
        let temporal = init(channels * 3, 3)
            .chunks_exact(3)
            .map(|c| [c[0], c[1], c[2]])
            .collect();
        let squeeze_fan = channels * PATCH * PATCH;
        let weights = Self {
            channels,
            reduction,
            temporal,
            squeeze: init(d * squeeze_fan, squeeze_fan),
            squeeze_bias: init(d, squeeze_fan),
            attention: AttentionWeights {
                dim: d,
                heads,
                query: init(d * d, d),
                query_bias: init(d, d),
                key: init(d * d, d),
                key_bias: init(d, d),
                value: init(d * d, d),
                value_bias: init(d, d),
                output: init(d * d, d),
                output_bias: init(d, d),
            },
            point: init(d * channels, d),
            point_bias: init(channels, d),
        };
        weights.validate()?;
        Ok(weights)
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.channels;
        if self.reduction == 0 || c == 0 || !c.is_multiple_of(self.reduction) {
            return Err(shape_err("reduction must divide channels"));
        }
        let d = c / self.reduction;
        let a = &self.attention;
        let checks = [
            ("temporal", self.temporal.len(), c),
            ("squeeze", self.squeeze.len(), d * c * PATCH * PATCH),
            ("squeeze_bias", self.squeeze_bias.len(), d),
            ("attention.dim", a.dim, d),
            ("query", a.query.len(), d * d),
            ("query_bias", a.query_bias.len(), d),
            ("key", a.key.len(), d * d),
            ("key_bias", a.key_bias.len(), d),
            ("value", a.value.len(), d * d),
            ("value_bias", a.value_bias.len(), d),
            ("output", a.output.len(), d * d),
            ("output_bias", a.output_bias.len(), d),
            ("point", self.point.len(), d * c),
            ("point_bias", self.point_bias.len(), c),
        ];
        for (name, got, want) in checks {
            if got != want {
                return Err(shape_err(format!("{name}: expected {want}, got {got}")));
            }
        }
        if a.heads == 0 || !d.is_multiple_of(a.heads) {
            return Err(shape_err(format!("{} heads do not divide {d}", a.heads)));
        }
        let all = self
            .temporal
            .iter()
            .flatten()
            .chain(&self.squeeze)
            .chain(&self.squeeze_bias)
            .chain(&a.query)
            .chain(&a.query_bias)
            .chain(&a.key)
            .chain(&a.key_bias)
            .chain(&a.value)
            .chain(&a.value_bias)
            .chain(&a.output)
            .chain(&a.output_bias)
            .chain(&self.point)
            .chain(&self.point_bias);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(shape_err("weights contain non-finite values"));
        }
        Ok(())
    }
}

/// `out[c,t] = Σ_i taps[c][i+1] · f[c,t+i]` for `i ∈ {−1,0,1}`, zero outside
/// `0..L`.
pub fn temporal_conv(f: &Tensor4, taps: &[[f64; 3]]) -> Result<Tensor4> {
    let [c, l, h, w] = f.dims;
    if taps.len() != c {
        return Err(shape_err(format!("{} kernels for {c} channels", taps.len())));
    }
    let plane = h * w;
    let mut out = Tensor4::zeros(f.dims);
    for (ch, kernel) in taps.iter().enumerate() {
        for t in 0..l {
            let dst = f.index(ch, t, 0, 0);
            for (k, &tap) in kernel.iter().enumerate() {
                let src_t = t as isize + k as isize - 1;
                if src_t < 0 || src_t >= l as isize || tap == 0.0 {
                    continue;
                }
                let src = f.index(ch, src_t as usize, 0, 0);
                for p in 0..plane {
                    out.data[dst + p] += tap * f.data[src + p];
                }
            }
        }
    }
    Ok(out)
}

/// Non-overlapping 7×7 patch convolution to `C/r` channels. Tokens are
/// ordered row-major over the patch grid; trailing rows/columns that do not
/// fill a patch are ignored.
pub fn patch_squeeze(frame: &Tensor3, weights: &SteWeights) -> Result<Matrix> {
    let [c, h, w] = frame.dims;
    if c != weights.channels {
        return Err(shape_err(format!("{c} channels, weights expect {}", weights.channels)));
    }
    if h < PATCH || w < PATCH {
        return Err(Error::TooSmall { height: h, width: w });
    }
    let (gh, gw) = (h / PATCH, w / PATCH);
    let d = weights.squeezed();
    let mut out = Matrix::zeros(gh * gw, d);
    for gy in 0..gh {
        for gx in 0..gw {
            let token = gy * gw + gx;
            for o in 0..d {
                let mut acc = weights.squeeze_bias[o];
                for ch in 0..c {
                    let wbase = (o * c + ch) * PATCH * PATCH;
                    for a in 0..PATCH {
                        for b in 0..PATCH {
                            acc += weights.squeeze[wbase + a * PATCH + b]
                                * frame.get(ch, gy * PATCH + a, gx * PATCH + b);
                        }
                    }
                }
                out.data[token * d + o] = acc;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    pub tokens: Matrix,
    /// One p×p row-stochastic matrix per head.
    pub weights: Vec<Matrix>,
}

/// Multi-head scaled dot-product self-attention, no positional encoding.
pub fn self_att(tokens: &Matrix, attn: &AttentionWeights) -> Result<AttentionOutput> {
    let d = attn.dim;
    if tokens.cols != d {
        return Err(shape_err(format!("tokens are {} wide, attention expects {d}", tokens.cols)));
    }
    if tokens.rows == 0 {
        return Err(shape_err("no tokens"));
    }
    if attn.heads == 0 || !d.is_multiple_of(attn.heads) {
        return Err(shape_err(format!("{} heads do not divide {d}", attn.heads)));
    }
    let p = tokens.rows;
    let dh = d / attn.heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let q = tokens.affine(&attn.query, &attn.query_bias, d);
    let k = tokens.affine(&attn.key, &attn.key_bias, d);
    let v = tokens.affine(&attn.value, &attn.value_bias, d);

    let mut context = Matrix::zeros(p, d);
    let mut all_weights = Vec::with_capacity(attn.heads);
    for head in 0..attn.heads {
        let off = head * dh;
        let mut wts = Matrix::zeros(p, p);
        for i in 0..p {
            let row = &mut wts.data[i * p..(i + 1) * p];
            for (j, s) in row.iter_mut().enumerate() {
                *s = (0..dh).map(|e| q.get(i, off + e) * k.get(j, off + e)).sum::<f64>() * scale;
            }
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.iter_mut().for_each(|s| *s = (*s - max).exp());
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|s| *s /= sum);
            for e in 0..dh {
                context.data[i * d + off + e] = (0..p).map(|j| row[j] * v.get(j, off + e)).sum();
            }
        }
        all_weights.push(wts);
    }
    Ok(AttentionOutput {
        tokens: context.affine(&attn.output, &attn.output_bias, d),
        weights: all_weights,
    })
}

/// 1×1 convolution from `C/r` back to `C` channels.
pub fn point_conv(tokens: &Matrix, weights: &SteWeights) -> Result<Matrix> {
    if tokens.cols != weights.squeezed() {
        return Err(shape_err(format!(
            "tokens are {} wide, point conv expects {}",
            tokens.cols,
            weights.squeezed()
        )));
    }
    Ok(tokens.affine(&weights.point, &weights.point_bias, weights.channels))
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_input(f: &Tensor4, weights: &SteWeights) -> Result<()> {
    weights.validate()?;
    let [c, l, h, w] = f.dims;
    if c != weights.channels {
        return Err(shape_err(format!("{c} channels, weights expect {}", weights.channels)));
    }
    if l == 0 {
        return Err(shape_err("empty time axis"));
    }
    if h < PATCH || w < PATCH {
        return Err(Error::TooSmall { height: h, width: w });
    }
    Ok(())
}

/// Sigmoid gate computed from already time-convolved features.
pub fn spatial_gate(f_hat: &Tensor4, weights: &SteWeights) -> Result<Tensor4> {
    check_input(f_hat, weights)?;
    let [c, l, h, w] = f_hat.dims;
    let (gh, gw) = (h / PATCH, w / PATCH);
    let mut gate = Tensor4::zeros(f_hat.dims);
    for t in 0..l {
        let squeezed = patch_squeeze(&f_hat.frame(t), weights)?;
        let attended = self_att(&squeezed, &weights.attention)?.tokens;
        let excited = point_conv(&attended, weights)?;
        for ch in 0..c {
            let grid = Plane::from_fn(gh, gw, |gy, gx| excited.get(gy * gw + gx, ch));
            let up = resize_plane(&grid, h, w);
            let dst = gate.index(ch, t, 0, 0);
            for (g, &v) in gate.data[dst..dst + h * w].iter_mut().zip(up.data()) {
                *g = sigmoid(v);
            }
        }
    }
    Ok(gate)
}

pub fn ste_forward(f: &Tensor4, weights: &SteWeights) -> Result<Tensor4> {
    check_input(f, weights)?;
    let f_hat = temporal_conv(f, &weights.temporal)?;
    let gate = spatial_gate(&f_hat, weights)?;
    f_hat.mul(&gate)
}

/// Binary cross-entropy with the prediction clamped to `[ε, 1−ε]`.
pub fn bce_loss(y_pred: f64, y_gt: f64) -> f64 {
    let p = y_pred.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -y_gt * p.ln() - (1.0 - y_gt) * (1.0 - p).ln()
}

/// Named flat array with its shape, as stored in weight fixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsDocument {
    pub schema: String,
    pub channels: usize,
    pub reduction: usize,
    pub heads: usize,
    pub arrays: Vec<NamedArray>,
}

impl SteWeights {
    pub fn to_document(&self) -> String {
        let c = self.channels;
        let d = self.squeezed();
        let a = &self.attention;
        let arr = |name: &str, shape: Vec<usize>, data: Vec<f64>| NamedArray {
            name: name.to_string(),
            shape,
            data,
        };
        let doc = WeightsDocument {
            schema: WEIGHTS_SCHEMA.to_string(),
            channels: c,
            reduction: self.reduction,
            heads: a.heads,
            arrays: vec![
                arr("temporal", vec![c, 3], self.temporal.iter().flatten().copied().collect()),
                arr("squeeze", vec![d, c, PATCH, PATCH], self.squeeze.clone()),
                arr("squeeze_bias", vec![d], self.squeeze_bias.clone()),
                arr("query", vec![d, d], a.query.clone()),
                arr("query_bias", vec![d], a.query_bias.clone()),
                arr("key", vec![d, d], a.key.clone()),
                arr("key_bias", vec![d], a.key_bias.clone()),
                arr("value", vec![d, d], a.value.clone()),
                arr("value_bias", vec![d], a.value_bias.clone()),
                arr("output", vec![d, d], a.output.clone()),
                arr("output_bias", vec![d], a.output_bias.clone()),
                arr("point", vec![d, c], self.point.clone()),
                arr("point_bias", vec![c], self.point_bias.clone()),
            ],
        };
        serde_json::to_string(&doc).expect("weights always serialize")
    }

    pub fn from_document(text: &str) -> Result<SteWeights> {
        let mut doc: WeightsDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("weights: {e}")))?;
        if doc.schema != WEIGHTS_SCHEMA {
            return Err(Error::Parse(format!("weights: unsupported schema `{}`", doc.schema)));
        }
        if doc.reduction == 0 || !doc.channels.is_multiple_of(doc.reduction) {
            return Err(shape_err("reduction must divide channels"));
        }
        let c = doc.channels;
        let d = c / doc.reduction;
        let mut take = |name: &str, shape: &[usize]| -> Result<Vec<f64>> {
            let pos = doc
                .arrays
                .iter()
                .position(|a| a.name == name)
                .ok_or_else(|| Error::Parse(format!("weights: missing array `{name}`")))?;
            let a = doc.arrays.swap_remove(pos);
            if a.shape != shape || a.data.len() != shape.iter().product::<usize>() {
                return Err(shape_err(format!(
                    "{name}: expected shape {shape:?}, got {:?} with {} values",
                    a.shape,
                    a.data.len()
                )));
            }
            Ok(a.data)
        };
        let temporal = take("temporal", &[c, 3])?
            .chunks_exact(3)
            .map(|t| [t[0], t[1], t[2]])
            .collect();
        let weights = SteWeights {
            channels: c,
            reduction: doc.reduction,
            temporal,
            squeeze: take("squeeze", &[d, c, PATCH, PATCH])?,
            squeeze_bias: take("squeeze_bias", &[d])?,
            attention: AttentionWeights {
                dim: d,
                heads: doc.heads,
                query: take("query", &[d, d])?,
                query_bias: take("query_bias", &[d])?,
                key: take("key", &[d, d])?,
                key_bias: take("key_bias", &[d])?,
                value: take("value", &[d, d])?,
                value_bias: take("value_bias", &[d])?,
                output: take("output", &[d, d])?,
                output_bias: take("output_bias", &[d])?,
            },
            point: take("point", &[d, c])?,
            point_bias: take("point_bias", &[c])?,
        };
        weights.validate()?;
        Ok(weights)
    }
}
