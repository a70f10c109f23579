use std::fs;

use pfake_core::fixture::{synthetic_clip, FaceFixture};
use pfake_core::media::{save_clip, write_landmarks, Clip};
use pfake_core::pipeline::{
    apply_trace, derive_clip_seed, generate_batch, generate_pfake, generate_pfake_with, labels, ManifestEntry,
};
use pfake_core::rpg::{parse_trace, ParamSet, RpgConfig, Trace};
use pfake_core::{Error, Mask};

fn clip(frames: usize, side: usize, seed: u64) -> Clip {
    FaceFixture {
        frames,
        height: side,
        width: side,
        drift: 1.5,
        seed,
    }
    .build()
    .unwrap()
}

#[test]
fn same_seed_same_bytes() {
    let c = clip(12, 64, 1);
    let (a, ta) = generate_pfake(&c, 9).unwrap();
    let (b, tb) = generate_pfake(&c, 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(ta, tb);
    let (d, _) = generate_pfake(&c, 10).unwrap();
    assert_ne!(a, d);
    assert_eq!((a.len(), a.height(), a.width()), (c.len(), c.height(), c.width()));
}

#[test]
fn replaying_a_trace_reproduces_the_clip() {
    let c = clip(10, 64, 2);
    let (fake, trace) = generate_pfake(&c, 3).unwrap();
    let parsed = parse_trace(&trace.to_document()).unwrap();
    assert_eq!(apply_trace(&c, &parsed).unwrap().clip, fake);
}

#[test]
fn single_frame_clip() {
    let c = clip(1, 64, 3);
    let (fake, trace) = generate_pfake(&c, 1).unwrap();
    assert_eq!(fake.len(), 1);
    assert_eq!(trace.params.len(), 1);
}

#[test]
fn identity_params_reproduce_real() {
    let c = clip(6, 64, 4);
    let out = apply_trace(&c, &Trace::new(0, vec![ParamSet::identity(); 6])).unwrap();
    assert_eq!(out.clip, c);
}

#[test]
fn segment_change_raises_masked_difference() {
    let c = clip(32, 96, 5);
    let out = generate_pfake_with(&c, 77, &RpgConfig::default()).unwrap();
    let p = &out.trace.params;
    assert!(p.last().unwrap().segment_id >= 1);
    let mut found = false;
    for t in 0..p.len() - 1 {
        if p[t] == p[t + 1] {
            continue;
        }
        let hint = out.mattes[t].union(&out.mattes[t + 1]);
        let diff = |x: &Clip| -> f64 {
            let (a, b) = (x.frames()[t].data(), x.frames()[t + 1].data());
            let mut acc = 0.0;
            let mut n = 0;
            for k in 0..hint.data().len() {
                if hint.data()[k] > 0.0 {
                    for ch in 0..3 {
                        acc += (a[k * 3 + ch] as f64 - b[k * 3 + ch] as f64).abs();
                    }
                    n += 3;
                }
            }
            acc / n as f64
        };
        if diff(&out.clip) > diff(&c) {
            found = true;
        }
    }
    assert!(found);
}

#[test]
fn outside_matte_is_untouched() {
    let c = clip(16, 80, 6);
    let out = generate_pfake_with(&c, 5, &RpgConfig::default()).unwrap();
    for ((r, f), m) in c.frames().iter().zip(out.clip.frames()).zip(&out.mattes) {
        for (k, &v) in m.data().iter().enumerate() {
            if v == 0.0 {
                assert_eq!(r.data()[k * 3..k * 3 + 3], f.data()[k * 3..k * 3 + 3]);
            }
        }
    }
    assert!(out.mattes.iter().all(|m: &Mask| !m.is_empty()));
}

#[test]
fn small_frames_and_bad_traces_are_rejected() {
    let tiny = FaceFixture { frames: 2, height: 24, width: 24, drift: 0.0, seed: 1 }.build().unwrap();
    assert!(matches!(generate_pfake(&tiny, 1), Err(Error::InvalidClip(_))));
    let c = clip(4, 64, 1);
    assert!(matches!(
        apply_trace(&c, &Trace::new(0, vec![ParamSet::identity(); 3])),
        Err(Error::CountMismatch { .. })
    ));
    let mut bad = ParamSet::identity();
    bad.editor.down_scale = 2.0;
    bad.editor.enabled.downsample = true;
    let err = apply_trace(&c, &Trace::new(0, vec![bad; 4])).unwrap_err();
    assert!(matches!(err, Error::FrameFailure { .. }));
}

fn write_source(root: &std::path::Path, name: &str, c: &Clip) -> (std::path::PathBuf, std::path::PathBuf) {
    let frames = root.join(name);
    save_clip(c, &frames, &Trace::new(0, vec![ParamSet::identity(); c.len()])).unwrap();
    fs::remove_file(frames.join("trace.json")).unwrap();
    let lm = root.join(format!("{name}.json"));
    write_landmarks(&lm, c.landmarks()).unwrap();
    (frames, lm)
}

#[test]
fn batch_isolates_failures_and_reruns_identically() {
    let src = tempfile::tempdir().unwrap();
    let c = synthetic_clip(8);
    let (frames, lm) = write_source(src.path(), "src", &c);
    let manifest = vec![
        ManifestEntry { frame_dir: frames.clone(), landmark_file: lm.clone(), source_id: "a".into() },
        ManifestEntry { frame_dir: frames.clone(), landmark_file: lm.clone(), source_id: "b".into() },
        ManifestEntry { frame_dir: src.path().join("missing"), landmark_file: lm.clone(), source_id: "c".into() },
    ];
    let out1 = tempfile::tempdir().unwrap();
    let r1 = generate_batch(&manifest, 42, out1.path(), &RpgConfig::default());
    assert_eq!(r1.succeeded.len(), 2);
    assert_eq!(r1.failed.len(), 1);
    assert_eq!(r1.failed[0].source_id, "c");
    let read = |root: &std::path::Path, id: &str| fs::read(root.join(id).join("000000.png")).unwrap();
    assert_ne!(read(out1.path(), "a"), read(out1.path(), "b"));
    assert_eq!(r1.succeeded[0].seed, derive_clip_seed(42, "a"));

    let out2 = tempfile::tempdir().unwrap();
    let r2 = generate_batch(&manifest[..1], 42, out2.path(), &RpgConfig::default());
    assert_eq!(r2.succeeded.len(), 1);
    for t in 0..c.len() {
        let name = format!("{t:06}.png");
        assert_eq!(
            fs::read(out1.path().join("a").join(&name)).unwrap(),
            fs::read(out2.path().join("a").join(&name)).unwrap()
        );
    }
    assert_eq!(
        fs::read(out1.path().join("a/trace.json")).unwrap(),
        fs::read(out2.path().join("a/trace.json")).unwrap()
    );
}

#[test]
fn label_convention() {
    assert_eq!(labels(), (0, 1));
}
