//! Acceptance suite: one PASS/FAIL line per criterion. Runs with
//! `harness = false`. Failures are reported without failing the run unless
//! `PFAKE_ACCEPTANCE_STRICT=1` is set.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pfake_core::analysis::{frame_deltas, temporal_slice_energy, DEFAULT_SLICE_COLUMNS};
use pfake_core::dct::{dct2, idct2};
use pfake_core::editor::{adjust_brightness, edit_frame, freq_perturb_with_noise};
use pfake_core::fixture::FaceFixture;
use pfake_core::media::{Frame, Plane};
use pfake_core::pipeline::{apply_trace, generate_pfake_with};
use pfake_core::rpg::{serialize_trace, EditorParams, Jitter, MaskKind, ParamSet, Rpg, RpgConfig, Trace};
use pfake_core::ste::{
    bce_loss, patch_squeeze, self_att, ste_forward, temporal_conv, Matrix, SteWeights, Tensor4,
};
use pfake_core::Mask;

type Outcome = (bool, String);

fn fixture(frames: usize, side: usize, seed: u64) -> pfake_core::Clip {
    FaceFixture {
        frames,
        height: side,
        width: side,
        drift: 1.5,
        seed,
    }
    .build()
    .expect("fixture builds")
}

fn determinism() -> Outcome {
    let clip = fixture(32, 299, 11);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let start = Instant::now();
    let (a, b) = pool.install(|| {
        let cfg = RpgConfig::default();
        (
            generate_pfake_with(&clip, 42, &cfg).unwrap(),
            generate_pfake_with(&clip, 42, &cfg).unwrap(),
        )
    });
    let per_run = start.elapsed().as_secs_f64() / 2.0;
    let frames_equal = a
        .clip
        .frames()
        .iter()
        .zip(b.clip.frames())
        .all(|(x, y)| x.data() == y.data());
    let traces_equal = serialize_trace(&a.trace) == serialize_trace(&b.trace);
    (
        frames_equal && traces_equal && per_run < 10.0,
        format!(
            "32x299x299, seed 42: frames identical={frames_equal}, traces identical={traces_equal}, {per_run:.2} s per run on one thread"
        ),
    )
}

fn identity() -> Outcome {
    let clip = fixture(8, 96, 3);
    let trace = Trace::new(0, vec![ParamSet::identity(); clip.len()]);
    let out = apply_trace(&clip, &trace).unwrap();
    let all_off = out.clip.frames() == clip.frames();

    let frame = &clip.frames()[2];
    let lm = &clip.landmarks()[2];
    let mut elastic = EditorParams::identity();
    elastic.enabled.elastic = true;
    elastic.elastic.alpha = 0.0;
    elastic.elastic.sigma = 6.0;
    let elastic_ok = edit_frame(frame, lm, &elastic).unwrap() == *frame;

    let brightness_ok = adjust_brightness(frame, 1.0) == *frame;

    let (h, w) = frame.dims();
    let zeros = [Plane::zeros(h, w), Plane::zeros(h, w), Plane::zeros(h, w)];
    let freq = freq_perturb_with_noise(frame, &zeros);
    let freq_err = freq
        .data()
        .iter()
        .zip(frame.data())
        .map(|(&a, &b)| (a as i32 - b as i32).abs())
        .max()
        .unwrap();
    (
        all_off && elastic_ok && brightness_ok && freq_err <= 1,
        format!(
            "all-off trace exact={all_off}, elastic alpha=0 exact={elastic_ok}, brightness 1.0 exact={brightness_ok}, zero spectral noise max error {freq_err}/255"
        ),
    )
}

fn lut_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let mut mismatches = 0usize;
    let mut samples = 0usize;
    for _ in 0..1000 {
        let value: u8 = rng.random();
        let (b, t, a) = (
            rng.random_range(0.7..=1.3),
            rng.random_range(0.7..=1.3),
            rng.random_range(0.7..=1.3),
        );
        let mut pixels: Vec<[u8; 3]> = (0..16).map(|_| [rng.random(), rng.random(), rng.random()]).collect();
        pixels[0] = [value; 3];
        let frame = Frame::new(4, 4, pixels.iter().flatten().copied().collect()).unwrap();
        let mut params = EditorParams::identity();
        params.jitter = Jitter {
            brightness: b,
            contrast: t,
            saturation: a,
        };
        let lm = fixture(1, 96, 0).landmarks()[0].clone();
        let got = edit_frame(&frame, &lm, &params).unwrap();
        let want = common::jitter_oracle(&pixels, b, t, a);
        for (g, w) in got.data().chunks_exact(3).zip(&want) {
            samples += 3;
            mismatches += g.iter().zip(w).filter(|(x, y)| x != y).count();
        }
    }
    (
        mismatches == 0,
        format!("1000 random (value, brightness, contrast, saturation) tuples, {samples} samples, {mismatches} mismatches"),
    )
}

fn elastic_oracle() -> Outcome {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for (side, sigma, alpha) in [(4usize, 1.0, 3.0), (8, 1.5, 6.0), (8, 0.8, 12.0)] {
        for seed in [0u64, 7, 99] {
            let frame = Frame::from_fn(side, side, |i, j| {
                [(i * side + j) as u8, (i * 17) as u8, (j * 29) as u8]
            });
            let out = pfake_core::editor::elastic_transform(&frame, sigma, alpha, seed);
            let idx = common::elastic_indices(side, side, sigma, alpha, seed);
            for i in 0..side {
                for j in 0..side {
                    checked += 1;
                    let (r, c) = idx[i][j];
                    if out.pixel(i, j) != frame.pixel(r, c) {
                        mismatches += 1;
                    }
                }
            }
        }
    }
    (
        mismatches == 0,
        format!("4x4 and 8x8 fixtures, 9 (size, sigma, alpha, seed) cases, {checked} pixels, {mismatches} mismatches"),
    )
}

fn dct_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut round = 0.0f64;
    let mut direct = 0.0f64;
    for _ in 0..100 {
        let block: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..8).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let plane = Plane::from_fn(8, 8, |i, j| block[i][j]);
        let coef = dct2(&plane);
        let back = idct2(&coef);
        let oracle = common::dct2_direct(&block);
        for i in 0..8 {
            for j in 0..8 {
                round = round.max((back.get(i, j) - block[i][j]).abs());
                direct = direct.max((coef.get(i, j) - oracle[i][j]).abs());
            }
        }
    }
    (
        round < 1e-9 && direct < 1e-9,
        format!("100 random 8x8 blocks: max round-trip error {round:.2e}, max coefficient error vs direct sum {direct:.2e}"),
    )
}

fn calibration() -> Outcome {
    let start = Instant::now();
    let mut rpg = Rpg::new(2718, RpgConfig::default());
    let n = 10_000;
    let mut enabled = [0usize; 7];
    let mut face = 0usize;
    let mut jitter_present = 0usize;
    for _ in 0..n {
        let p = rpg.draw_param_set();
        for (count, on) in enabled.iter_mut().zip(p.editor.enabled.as_array()) {
            *count += on as usize;
        }
        face += MaskKind::FACE_GROUP.contains(&p.mask.kind) as usize;
        let j = p.editor.jitter;
        jitter_present += [j.brightness, j.contrast, j.saturation]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    let rates: Vec<f64> = enabled.iter().map(|&c| c as f64 / n as f64).collect();
    let face_rate = face as f64 / n as f64;
    let jitter_rate = jitter_present as f64 / n as f64;
    let ok = rates.iter().all(|r| (r - 0.30).abs() <= 0.02)
        && (face_rate - 0.75).abs() <= 0.02
        && jitter_rate == 1.0
        && secs < 5.0;
    let shown: Vec<String> = rates.iter().map(|r| format!("{r:.3}")).collect();
    (
        ok,
        format!(
            "10000 draws: edit rates [{}], jitter {jitter_rate:.2}, face group {face_rate:.3}, {secs:.3} s",
            shown.join(", ")
        ),
    )
}

fn disruption() -> Outcome {
    let clip = fixture(32, 128, 21);
    let seed = 2024;
    let cfg = RpgConfig::default();
    let out = generate_pfake_with(&clip, seed, &cfg).unwrap();
    let real_slice = temporal_slice_energy(clip.frames(), DEFAULT_SLICE_COLUMNS).unwrap();
    let fake_slice = temporal_slice_energy(out.clip.frames(), DEFAULT_SLICE_COLUMNS).unwrap();

    let (h, w) = (clip.height(), clip.width());
    let hint = out.mattes.iter().fold(Mask::zeros(h, w), |acc, m| acc.union(m));
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let real_in = mean(frame_deltas(clip.frames(), Some(&hint)));
    let fake_in = mean(frame_deltas(out.clip.frames(), Some(&hint)));
    let masked_ratio = fake_in / real_in;
    let segments = out.trace.params.last().unwrap().segment_id + 1;

    let single = Rpg::new(seed, cfg).draw_param_set();
    let flat = apply_trace(&clip, &Trace::new(seed, vec![single; clip.len()])).unwrap();
    let single_ratio = mean(frame_deltas(flat.clip.frames(), None)) / mean(frame_deltas(clip.frames(), None));
    let flat_hint = flat.mattes.iter().fold(Mask::zeros(h, w), |acc, m| acc.union(m));
    let single_in = mean(frame_deltas(flat.clip.frames(), Some(&flat_hint))) / mean(frame_deltas(clip.frames(), Some(&flat_hint)));

    (
        fake_slice > real_slice && masked_ratio >= 1.2 && (0.9..=1.1).contains(&single_ratio),
        format!(
            "seed {seed}, {segments} segments: slice energy {fake_slice:.3} vs real {real_slice:.3}, in-matte delta ratio {masked_ratio:.2}, single-segment delta ratio {single_ratio:.3} (in-matte {single_in:.3})"
        ),
    )
}

fn locality() -> Outcome {
    let mut violations = 0usize;
    let mut zero_px = 0usize;
    for (clip_seed, seed) in [(21u64, 2024u64), (5, 77), (9, 31337)] {
        let clip = fixture(32, 96, clip_seed);
        let out = generate_pfake_with(&clip, seed, &RpgConfig::default()).unwrap();
        for ((real, fake), matte) in clip.frames().iter().zip(out.clip.frames()).zip(&out.mattes) {
            for (k, &m) in matte.data().iter().enumerate() {
                if m == 0.0 {
                    zero_px += 1;
                    if real.data()[k * 3..k * 3 + 3] != fake.data()[k * 3..k * 3 + 3] {
                        violations += 1;
                    }
                }
            }
        }
    }
    (
        violations == 0 && zero_px > 0,
        format!("3 fixture clips x 32 frames: {zero_px} zero-matte pixels, {violations} differ"),
    )
}

fn ste_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, pass: bool| {
        if !pass {
            ok = false;
            notes.push(format!("{name} failed"));
        }
    };

    let weights = SteWeights::seeded(16, 1).unwrap();
    let f = Tensor4::random([16, 4, 28, 28], 2);
    let out = ste_forward(&f, &weights).unwrap();
    check("shape", out.dims() == [16, 4, 28, 28]);

    let tokens = patch_squeeze(&f.frame(0), &weights).unwrap();
    check("patch count", tokens.rows == 16);

    let identity = temporal_conv(&f, &vec![[0.0, 1.0, 0.0]; 16]).unwrap();
    check("identity kernel", identity == f);

    let mut gate_ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..100 {
        let dims = [8 * rng.random_range(1..=2), rng.random_range(1..=3), rng.random_range(7..=16), rng.random_range(7..=16)];
        let w = SteWeights::seeded(dims[0], 100 + k).unwrap();
        let x = Tensor4::random(dims, 200 + k);
        let hat = temporal_conv(&x, &w.temporal).unwrap();
        let gated = ste_forward(&x, &w).unwrap();
        gate_ok &= gated
            .data()
            .iter()
            .zip(hat.data())
            .all(|(g, h)| g.abs() <= h.abs());
    }
    check("gating bound", gate_ok);

    let attn = self_att(&tokens, &weights.attention).unwrap();
    let row_err = attn
        .weights
        .iter()
        .flat_map(|m| (0..m.rows).map(move |r| (m.row(r).iter().sum::<f64>() - 1.0).abs()))
        .fold(0.0, f64::max);
    check("row sums", row_err <= 1e-9);

    let mut perm: Vec<usize> = (0..tokens.rows).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let d = tokens.cols;
    let permuted = Matrix::new(
        tokens.rows,
        d,
        perm.iter().flat_map(|&r| tokens.row(r).to_vec()).collect(),
    )
    .unwrap();
    let attn_p = self_att(&permuted, &weights.attention).unwrap();
    let perm_err = perm
        .iter()
        .enumerate()
        .flat_map(|(i, &r)| {
            let a = attn_p.tokens.row(i).to_vec();
            let b = attn.tokens.row(r).to_vec();
            a.into_iter().zip(b).map(|(x, y)| (x - y).abs())
        })
        .fold(0.0, f64::max);
    check("permutation equivariance", perm_err <= 1e-9);

    let mut open = weights.clone();
    open.temporal = vec![[0.0, 1.0, 0.0]; 16];
    open.point.iter_mut().for_each(|v| *v = 0.0);
    open.point_bias.iter_mut().for_each(|v| *v = 40.0);
    let passthrough = ste_forward(&f, &open).unwrap();
    let pass_err = passthrough
        .data()
        .iter()
        .zip(f.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check("open gate", pass_err <= 1e-6);

    let ln2 = std::f64::consts::LN_2;
    check("bce", (bce_loss(0.5, 0.0) - ln2).abs() <= 1e-9 && (bce_loss(0.5, 1.0) - ln2).abs() <= 1e-9);

    let detail = if notes.is_empty() {
        format!(
            "C=16 L=4 28x28: shape kept, 16 patches, identity kernel exact, gating bound on 100 inputs, row-sum error {row_err:.1e}, permutation error {perm_err:.1e}, open-gate error {pass_err:.1e}, bce(0.5) = ln 2"
        )
    } else {
        notes.join("; ")
    };
    (ok, detail)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("determinism", determinism),
        ("identity", identity),
        ("lut-oracle", lut_oracle),
        ("elastic-oracle", elastic_oracle),
        ("dct-round-trip", dct_roundtrip),
        ("calibration", calibration),
        ("disruption", disruption),
        ("locality", locality),
        ("ste", ste_suite),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let (pass, detail) = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            });
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        failed += !pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    let strict = std::env::var("PFAKE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        std::process::exit(1);
    }
}
