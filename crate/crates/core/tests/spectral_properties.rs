use std::fs;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use visdet_core::corpus::synthetic::{write_synthetic_corpus, SyntheticSpec};
use visdet_core::corpus::{ClassTable, DatasetManifest};
use visdet_core::spectral::{
    adjust_contrast_brightness, apply_fog, luma, motion_blur, night_vision_transform, obscura_transform,
    severity_score, thermal_transform, to_grayscale, transform_corpus, ColorMapLUT, GrayImage, ImageBuffer, Modality,
    NightVisionParams, ObscuraParams, TransformParams, TransformSeed,
};

fn image_strategy(max: u32) -> impl Strategy<Value = ImageBuffer> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<[u8; 3]>(), (w * h) as usize)
            .prop_map(move |px| ImageBuffer::new(w, h, px).unwrap())
    })
}

fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> ImageBuffer {
    ImageBuffer::new(w, h, (0..w * h).map(|_| rng.gen()).collect()).unwrap()
}

/// Inferno entries read straight from the shipped asset text.
fn asset_entries() -> Vec<[u8; 3]> {
    let text = include_str!("../assets/inferno.lut");
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let v: Vec<u8> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            [v[1], v[2], v[3]]
        })
        .collect()
}

#[test]
fn thermal_golden_matches_stage_oracles() {
    #[rustfmt::skip]
    let img = ImageBuffer::new(
        4,
        4,
        vec![
            [0, 0, 0], [255, 255, 255], [255, 0, 0], [0, 255, 0],
            [0, 0, 255], [10, 20, 30], [200, 100, 50], [128, 128, 128],
            [33, 66, 99], [250, 5, 125], [60, 60, 200], [90, 180, 45],
            [17, 17, 17], [240, 240, 10], [5, 250, 250], [100, 0, 100],
        ],
    )
    .unwrap();

    // hand-computed BT.601 luma, then a min/max stretch, then table lookup
    let gray: Vec<f64> = img
        .pixels()
        .iter()
        .map(|p| (0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64).round())
        .collect();
    let lo = gray.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = gray.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lut = asset_entries();
    let expected: Vec<[u8; 3]> = gray
        .iter()
        .map(|g| lut[((g - lo) * 255.0 / (hi - lo)).round() as usize])
        .collect();

    let out = thermal_transform(&img, &ColorMapLUT::inferno());
    assert_eq!(out.pixels(), &expected[..]);
    assert_eq!(out.get(0, 0), lut[0]);
    assert_eq!(out.get(1, 0), lut[255]);
}

#[test]
fn lut_asset_matches_reference_samples() {
    let lut = ColorMapLUT::inferno();
    assert_eq!(lut.entries().len(), 256);
    assert_eq!(lut.get(0), [0, 0, 4]);
    assert_eq!(lut.get(128), [188, 55, 84]);
    assert_eq!(lut.get(255), [252, 255, 164]);
    assert!(luma(lut.get(0)) < luma(lut.get(128)));
    assert!(luma(lut.get(128)) < luma(lut.get(255)));
    assert_eq!(&lut.entries()[..], &asset_entries()[..]);
}

#[test]
fn motion_blur_roughly_preserves_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let img = random_image(&mut rng, 64, 64);
    let mean = |im: &ImageBuffer| {
        im.pixels()
            .iter()
            .flat_map(|p| p.iter())
            .map(|&v| v as f64)
            .sum::<f64>()
            / (im.pixels().len() * 3) as f64
    };
    for (k, angle) in [(3, 0.0), (5, 45.0), (7, 90.0), (9, 137.0)] {
        let out = motion_blur(&img, k, angle).unwrap();
        assert!((mean(&out) - mean(&img)).abs() <= 1.0, "k={k} angle={angle}");
    }
}

#[test]
fn motion_blur_hand_convolution() {
    let img = ImageBuffer::new(5, 1, [0, 0, 255, 0, 0].iter().map(|&v| [v, v, v]).collect()).unwrap();
    let out = motion_blur(&img, 3, 0.0).unwrap();
    let got: Vec<u8> = out.pixels().iter().map(|p| p[0]).collect();
    assert_eq!(got, vec![0, 85, 85, 85, 0]);
}

#[test]
fn fog_endpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let img = random_image(&mut rng, 9, 7);
    assert_eq!(apply_fog(&img, 0.0).unwrap(), img);
    assert!(apply_fog(&img, 1.0)
        .unwrap()
        .pixels()
        .iter()
        .all(|p| *p == [255, 255, 255]));
}

#[test]
fn severity_defaults_and_constant_image() {
    let p = ObscuraParams::default();
    assert_eq!(p.nominal_severity().unwrap().value(), 0.25);

    let img = ImageBuffer::filled(12, 10, [77, 77, 77]).unwrap();
    let flat = ObscuraParams {
        fog_coeff: 0.0,
        cb_limit: 0.0,
        ..ObscuraParams::default()
    };
    let (out, _, _) = obscura_transform(&img, &flat, TransformSeed(3), "a").unwrap();
    assert_eq!(out, img);

    let (_, score, _) = obscura_transform(&img, &p, TransformSeed(3), "a").unwrap();
    assert_eq!(score.value(), 0.25);
}

#[test]
fn transform_corpus_is_worker_independent() {
    let src = TempDir::new().unwrap();
    let spec = SyntheticSpec {
        images: 6,
        ..SyntheticSpec::default()
    };
    let manifest =
        DatasetManifest::load(&write_synthetic_corpus(src.path(), &ClassTable::kiit_mita(), &spec).unwrap()).unwrap();
    let params = TransformParams::default();
    for modality in Modality::ALL {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        let ra = transform_corpus(
            &manifest,
            "test",
            modality,
            &params,
            TransformSeed(42),
            a.path(),
            Some(1),
        )
        .unwrap();
        let rb = transform_corpus(
            &manifest,
            "test",
            modality,
            &params,
            TransformSeed(42),
            b.path(),
            Some(4),
        )
        .unwrap();
        assert_eq!(ra.image_count, 6);
        assert_eq!(ra.rows, rb.rows);
        for row in &ra.rows {
            let id = &row.image_id;
            let name = format!("{id}.png");
            assert_eq!(
                fs::read(a.path().join("images").join(&name)).unwrap(),
                fs::read(b.path().join("images").join(&name)).unwrap(),
                "{modality:?} {id}"
            );
            assert_eq!(
                fs::read(a.path().join("labels").join(format!("{id}.txt"))).unwrap(),
                fs::read(src.path().join("test/labels").join(format!("{id}.txt"))).unwrap()
            );
        }
        let out = ImageBuffer::open(&a.path().join("images/img_0000.png")).unwrap();
        assert_eq!((out.width(), out.height()), (spec.width, spec.height));
    }
}

#[test]
fn transform_refuses_to_overwrite_sources() {
    let src = TempDir::new().unwrap();
    let spec = SyntheticSpec {
        images: 1,
        ..SyntheticSpec::default()
    };
    let manifest =
        DatasetManifest::load(&write_synthetic_corpus(src.path(), &ClassTable::kiit_mita(), &spec).unwrap()).unwrap();
    let out = src.path().join("test");
    assert!(transform_corpus(
        &manifest,
        "test",
        Modality::Gray,
        &TransformParams::default(),
        TransformSeed(1),
        &out,
        None
    )
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transforms_preserve_dimensions(img in image_strategy(12), seed in any::<u64>()) {
        let lut = ColorMapLUT::inferno();
        let dims = (img.width(), img.height());
        let g = to_grayscale(&img);
        prop_assert_eq!((g.width(), g.height()), dims);
        let t = thermal_transform(&img, &lut);
        prop_assert_eq!((t.width(), t.height()), dims);
        let n = night_vision_transform(&img, &NightVisionParams::default()).unwrap();
        prop_assert_eq!((n.width(), n.height()), dims);
        let (o, _, _) = obscura_transform(&img, &ObscuraParams::default(), TransformSeed(seed), "x").unwrap();
        prop_assert_eq!((o.width(), o.height()), dims);
    }

    #[test]
    fn grayscale_fixed_point_and_idempotence(values in prop::collection::vec(any::<u8>(), 1..64)) {
        let w = values.len() as u32;
        let equal = ImageBuffer::new(w, 1, values.iter().map(|&v| [v, v, v]).collect()).unwrap();
        let gray = to_grayscale(&equal);
        prop_assert_eq!(gray.intensities(), &values[..]);

        let colored = ImageBuffer::new(w, 1, values.iter().map(|&v| [v, v.wrapping_mul(7), 255 - v]).collect()).unwrap();
        let once = to_grayscale(&colored);
        let twice = to_grayscale(&once.to_rgb());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn night_vision_green_dominates(img in image_strategy(10)) {
        let out = night_vision_transform(&img, &NightVisionParams::default()).unwrap();
        for p in out.pixels() {
            prop_assert!(p[1] >= p[0] && p[1] >= p[2]);
        }
    }

    #[test]
    fn fog_is_monotone(img in image_strategy(10), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = apply_fog(&img, lo).unwrap();
        let y = apply_fog(&img, hi).unwrap();
        for (p, q) in x.pixels().iter().zip(y.pixels()) {
            for c in 0..3 {
                prop_assert!(q[c] >= p[c]);
            }
        }
    }

    #[test]
    fn contrast_identity(img in image_strategy(10)) {
        prop_assert_eq!(adjust_contrast_brightness(&img, 1.0, 0.0).unwrap(), img);
    }

    #[test]
    fn constant_image_survives_blur(v in any::<[u8; 3]>(), k in (0u32..6).prop_map(|i| 2 * i + 1), angle in 0.0f64..180.0) {
        let img = ImageBuffer::filled(9, 6, v).unwrap();
        prop_assert_eq!(motion_blur(&img, k, angle).unwrap(), img);
    }

    #[test]
    fn obscura_is_deterministic(img in image_strategy(10), seed in any::<u64>(), id in "[a-z0-9_]{1,12}") {
        let p = ObscuraParams { blur_limit: 7, fog_coeff: 0.3, cb_limit: 0.2, ..ObscuraParams::default() };
        let a = obscura_transform(&img, &p, TransformSeed(seed), &id).unwrap();
        let b = obscura_transform(&img, &p, TransformSeed(seed), &id).unwrap();
        prop_assert_eq!(a.0, b.0);
        prop_assert_eq!(a.2, b.2);
    }

    #[test]
    fn severity_is_linear(
        m in 0.0f64..1.0, f in 0.0f64..1.0, c in 0.0f64..1.0,
        al in 0.0f64..4.0, be in 0.0f64..4.0, ga in 0.0f64..4.0,
        s in 0.0f64..4.0,
    ) {
        let base = severity_score(m, f, c, al, be, ga).unwrap().value();
        let doubled = severity_score(m, f, c, 2.0 * al, 2.0 * be, 2.0 * ga).unwrap().value();
        prop_assert!((doubled - 2.0 * base).abs() <= 1e-12 * (1.0 + base.abs()));
        let scaled_m = severity_score(s * m, f, c, al, be, ga).unwrap().value();
        prop_assert!((scaled_m - (base + al * (s - 1.0) * m)).abs() <= 1e-12 * (1.0 + scaled_m.abs()));
    }
}

#[test]
fn gray_png_is_single_channel() {
    let dir = TempDir::new().unwrap();
    let g = GrayImage::new(3, 2, vec![0, 50, 100, 150, 200, 250]).unwrap();
    let path = dir.path().join("g.png");
    g.save_png(&path).unwrap();
    let back = ImageBuffer::open(&path).unwrap();
    assert_eq!(back, g.to_rgb());
}
