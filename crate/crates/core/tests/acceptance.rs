//! Acceptance suite: one PASS/FAIL line per criterion, each checked against
//! its runtime budget. Exits nonzero if any criterion fails.
//!
//! The BioID criterion runs only when `BIOID_DIR` points at the dataset; the
//! face and eye cascades default to the vendored OpenCV files and can be
//! overridden with `BIOID_FACE_XML` / `BIOID_EYE_XML`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use blinkwatch_core::cascade::{
    classify_window, detect_multiscale, parse_legacy_cascade_xml, train_cascade,
    CascadeModel, CascadeTrainConfig, DetectParams, LegacyXmlError, ScaledCascade,
};
use blinkwatch_core::drowsiness::{
    classify_state, compute_pitch, replay, DrowsinessLevel, DrowsinessTracker, EyeObservation, Point,
    StreamRecord, TrackerConfig,
};
use blinkwatch_core::eval::{load_bioid, run_pipeline, EvalReport, GdrReport};
use blinkwatch_core::haarboost::{
    adaboost_train, enumerate_features, train_stump, window_norm, Booster, Label, LabeledSample,
};
use blinkwatch_core::imaging::{GrayImage, IntegralImage, Rect};
use blinkwatch_core::synth::{background_image, eye_surrogate, negative_scenes, plant, surrogate_dataset};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn c1_metrics() -> Result<String, String> {
    let flags = |n: usize| (0..1521).map(|i| i < n).collect::<Vec<_>>();
    let report = EvalReport::from_reports(
        GdrReport::from_flags("GDR1", flags(1442)).map_err(|e| e.to_string())?,
        GdrReport::from_flags("GDR2", flags(1031)).map_err(|e| e.to_string())?,
        GdrReport::from_flags("GDR3", flags(1263)).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let got: Vec<f64> = report.rows.iter().map(|r| r.gdr_percent).collect();
    for (g, want) in got.iter().zip([94.8, 67.78, 83.03]) {
        ensure!((g - want).abs() < 0.05, "{g:.4}% vs {want}%");
    }
    Ok(format!(
        "GDR1 {:.2}%, GDR2 {:.2}%, GDR3 {:.2}%",
        got[0], got[1], got[2]
    ))
}

fn c2_rules() -> Result<String, String> {
    let cfg = TrackerConfig::default();
    let mut cells = 0;
    for run in [0.0, 0.5, 1.9, 2.0, 2.1, 10.0] {
        for flag in [false, true] {
            let want = if run > cfg.closure_threshold {
                DrowsinessLevel::Alert
            } else if flag {
                DrowsinessLevel::Warning
            } else {
                DrowsinessLevel::Normal
            };
            let got = classify_state(run, flag, &cfg);
            ensure!(got == want, "run {run} flag {flag}: {got:?} vs {want:?}");
            cells += 1;
        }
    }
    ensure!(
        classify_state(2.0, false, &cfg) == DrowsinessLevel::Normal,
        "run == T must not alert"
    );
    Ok(format!("{cells} cells; run == T falls through to the pitch rule"))
}

fn c3_pitch() -> Result<String, String> {
    let p = |l: (f64, f64), r: (f64, f64)| compute_pitch(Point::new(l.0, l.1), Point::new(r.0, r.1)).unwrap();
    ensure!(p((100.0, 150.0), (160.0, 150.0)) == 0.0, "level eyes");
    ensure!((p((3.0, 4.0), (10.0, 11.0)) - 45.0).abs() < 1e-12, "dy == dx");
    let v = p((100.0, 120.0), (160.0, 140.0));
    ensure!((v - 18.4349488).abs() < 1e-6, "18.4349 expected, got {v}");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let l = Point::new(rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0));
        let r = Point::new(l.x + rng.random_range(1.0..200.0), l.y + rng.random_range(-200.0..200.0));
        let base = compute_pitch(l, r).unwrap();
        let (a, b, k) = (rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0), rng.random_range(0.05..20.0));
        let mirror = compute_pitch(Point::new(-l.x, l.y), Point::new(-r.x, r.y)).unwrap();
        let shifted = compute_pitch(Point::new(l.x + a, l.y + b), Point::new(r.x + a, r.y + b)).unwrap();
        let scaled = compute_pitch(
            Point::new(a + k * (l.x - a), b + k * (l.y - b)),
            Point::new(a + k * (r.x - a), b + k * (r.y - b)),
        )
        .unwrap();
        for d in [(base + mirror).abs(), (base - shifted).abs(), (base - scaled).abs()] {
            worst = worst.max(d);
        }
    }
    ensure!(worst <= 1e-9, "invariance off by {worst:e} degrees");
    Ok(format!("18.434949 deg; worst invariance error {worst:.1e} over 1000 pairs"))
}

fn c4_integral() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (w, h) = (rng.random_range(1..=64), rng.random_range(1..=64));
        let img = random_image(&mut rng, w, h);
        let ii = IntegralImage::new(&img);
        for _ in 0..50 {
            let r = random_rect(&mut rng, w, h);
            let got = ii.rect_sum(r).map_err(|e| e.to_string())?;
            ensure!(got == brute_sum(&img, r), "rect_sum mismatch at {r:?}");
            let s = ii.window_stats(r).map_err(|e| e.to_string())?;
            let (mean, var) = brute_stats(&img, r);
            worst = worst
                .max((s.mean - mean).abs() / mean.abs().max(1.0))
                .max((s.variance - var).abs() / var.abs().max(1.0));
        }
    }
    ensure!(worst <= 1e-9, "window_stats relative error {worst:e}");
    Ok(format!("10000 rects exact; window_stats worst relative error {worst:.1e}"))
}

fn c5_features() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 1000 {
        let f = random_feature(&mut rng, 24, 24);
        let scale: f64 = rng.random_range(1.0..2.5);
        let span = (24.0 * scale).ceil() as usize + 1;
        let img = random_image(&mut rng, span + 4, span + 4);
        let ii = IntegralImage::new(&img);
        let origin = (rng.random_range(0..4), rng.random_range(0..4));
        let Some(want) = brute_feature(&f, &img, origin.0, origin.1, scale) else {
            continue;
        };
        let got = f.eval(&ii, origin, scale, None).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
        let flat = GrayImage::filled(span + 4, span + 4, rng.random());
        let zero = f.eval(&IntegralImage::new(&flat), origin, scale, None).map_err(|e| e.to_string())?;
        ensure!(zero.abs() < 1e-6, "constant image gave {zero} for {f:?} at scale {scale}");
        checked += 1;
    }
    ensure!(worst <= 1e-9, "feature values off by {worst:e} (relative)");
    Ok(format!("1000 triples; worst relative error {worst:.1e}; constant images all 0"))
}

fn toy_samples(seed: u64) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..100)
        .map(|i| {
            if i % 2 == 0 {
                let img = GrayImage::from_fn(8, 8, |_, y| {
                    if y < 4 {
                        rng.random_range(160..=255)
                    } else {
                        rng.random_range(0..=90)
                    }
                });
                LabeledSample::new(&img, Label::Positive)
            } else {
                LabeledSample::new(&random_image(&mut rng, 8, 8), Label::Negative)
            }
        })
        .collect()
}

fn c6_adaboost() -> Result<String, String> {
    let features = enumerate_features(8, 8);
    let samples = toy_samples(6);
    let strong = adaboost_train(&samples, &features, 10).map_err(|e| e.to_string())?;
    let errors = samples
        .iter()
        .filter(|s| strong.predict(s) != (s.label == Label::Positive))
        .count();
    ensure!(errors == 0, "{errors} training errors after {} rounds", strong.weaks.len());
    let rounds_used = strong.weaks.len();

    // Bound check on a noisy variant so boosting runs several rounds.
    let mut noisy = toy_samples(7);
    for s in noisy.iter_mut().step_by(9) {
        s.label = s.label.flipped();
    }
    let pos = noisy.iter().filter(|s| s.label == Label::Positive).count() as f64;
    let d1: Vec<f64> = noisy
        .iter()
        .map(|s| if s.label == Label::Positive { 0.5 / pos } else { 0.5 / (100.0 - pos) })
        .collect();
    let mut booster = Booster::new(&noisy, &features).map_err(|e| e.to_string())?;
    let mut bound = 1.0;
    let mut rounds = 0;
    for _ in 0..20 {
        let Some(r) = booster.step().map_err(|e| e.to_string())? else {
            break;
        };
        rounds += 1;
        bound *= 2.0 * (r.error * (1.0 - r.error)).sqrt();
        let err: f64 = noisy
            .iter()
            .zip(&d1)
            .filter(|(s, _)| booster.classifier().predict(s) != (s.label == Label::Positive))
            .map(|(_, w)| w)
            .sum();
        ensure!(err <= bound + 1e-12, "round {rounds}: error {err} above bound {bound}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for set in 0..500 {
        let values: Vec<f64> = (0..20).map(|_| rng.random_range(0..8) as f64).collect();
        let labels: Vec<Label> = (0..20)
            .map(|_| if rng.random_bool(0.5) { Label::Positive } else { Label::Negative })
            .collect();
        let raw: Vec<f64> = (0..20).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let fit = train_stump(&values, &labels, &weights).map_err(|e| e.to_string())?;
        let oracle = exhaustive_stump_error(&values, &labels, &weights);
        ensure!((fit.error - oracle).abs() < 1e-12, "set {set}: stump {} vs oracle {oracle}", fit.error);
    }
    Ok(format!(
        "zero error after {rounds_used} round(s); bound held over {rounds} noisy rounds; 500 stump sets match"
    ))
}

fn c7_cascade() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut windows = 0;
    for _ in 0..20 {
        let model = random_cascade(&mut rng, 10, 10, 4);
        let img = textured_image(&mut rng, 48, 40);
        let ii = IntegralImage::new(&img);
        for scale in [1.0, 1.5] {
            let sc = ScaledCascade::new(&model, scale).map_err(|e| e.to_string())?;
            let (ww, wh) = sc.window();
            for y in (0..=img.height() - wh).step_by(2) {
                for x in (0..=img.width() - ww).step_by(2) {
                    let mut after_reject = false;
                    let mut rejected = false;
                    let v = sc.evaluate_traced(&ii, x, y, sc.norm_at(&ii, x, y), |_, _, passed| {
                        after_reject |= rejected;
                        rejected |= !passed;
                    });
                    ensure!(!after_reject, "stage evaluated after a rejection at ({x}, {y})");
                    ensure!(v.accepted != rejected, "verdict disagrees with trace");
                    windows += 1;
                }
            }
        }

        let mut lowered = model.clone();
        let k = rng.random_range(0..lowered.stages.len());
        lowered.stages[k].threshold -= rng.random_range(0.05..1.0);
        let (ww, wh) = model.window_at(1.0);
        for y in 0..=img.height() - wh {
            for x in 0..=img.width() - ww {
                let norm = window_norm(&ii, Rect::new(x, y, ww, wh), model.base_area());
                let a = classify_window(&model, &ii, (x, y), 1.0, norm).map_err(|e| e.to_string())?;
                let b = classify_window(&lowered, &ii, (x, y), 1.0, norm).map_err(|e| e.to_string())?;
                ensure!(!a.accepted || b.accepted, "lowering a threshold dropped window ({x}, {y})");
            }
        }
    }

    let model = random_cascade(&mut rng, 10, 10, 2);
    let img = textured_image(&mut rng, 120, 90);
    let params = DetectParams::default();
    let reference = detect_multiscale(&model, &img, &params).map_err(|e| e.to_string())?;
    ensure!(!reference.is_empty(), "determinism check needs detections");
    for threads in [1, 2, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        for _ in 0..2 {
            let out = pool.install(|| detect_multiscale(&model, &img, &params)).map_err(|e| e.to_string())?;
            ensure!(out == reference, "output differs with {threads} workers");
        }
    }
    Ok(format!(
        "{windows} traced windows; superset held; {} detections identical across 1/2/4/8 workers",
        reference.len()
    ))
}

fn c8_end_to_end() -> Result<String, String> {
    let train = surrogate_dataset(11, 200, 0);
    let pool = negative_scenes(12, 1000);
    let outcome = train_cascade(&train.positives, &pool, &CascadeTrainConfig::default()).map_err(|e| e.to_string())?;
    let model = &outcome.model;
    let accepts = |p: &GrayImage| {
        let ii = IntegralImage::new(p);
        let norm = window_norm(&ii, p.bounds(), model.base_area());
        classify_window(model, &ii, (0, 0), 1.0, norm).map(|v| v.accepted)
    };
    let test = surrogate_dataset(12345, 200, 1000);
    let mut correct = 0;
    for p in &test.positives {
        correct += accepts(p).map_err(|e| e.to_string())? as usize;
    }
    for n in &test.negatives {
        correct += !accepts(n).map_err(|e| e.to_string())? as usize;
    }
    let acc = correct as f64 / 1200.0;
    ensure!(acc >= 0.95, "held-out accuracy {acc:.4}");

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_iou: f64 = 1.0;
    for _ in 0..10 {
        let k: f64 = rng.random_range(1.0..3.0);
        let (w, h) = ((16.0 * k).round() as usize, (8.0 * k).round() as usize);
        let at = Rect::new(rng.random_range(0..128 - w), rng.random_range(0..96 - h), w, h);
        let mut img = background_image(&mut rng, 128, 96);
        plant(&mut img, &eye_surrogate(&mut rng), at);
        let dets = detect_multiscale(model, &img, &DetectParams::default()).map_err(|e| e.to_string())?;
        ensure!(dets.len() == 1, "planted at {at:?}: {} detections", dets.len());
        let iou = dets[0].rect.iou(&at);
        ensure!(iou >= 0.5, "planted at {at:?}: IoU {iou:.3}");
        worst_iou = worst_iou.min(iou);
    }
    Ok(format!(
        "{} stages, held-out accuracy {:.2}%; 10/10 planted scenes give one detection (min IoU {worst_iou:.2})",
        model.stages.len(),
        acc * 100.0
    ))
}

fn c9_tracker() -> Result<String, String> {
    let cfg = TrackerConfig {
        fps: 10.0,
        ..Default::default()
    };
    let obs: Vec<_> = (0..30)
        .map(|i| EyeObservation::new(i, i as f64 / 10.0, None, None))
        .collect();
    let records = replay(cfg, &obs).map_err(|e| e.to_string())?;
    let mut frame_idx = 0;
    let mut alerts = Vec::new();
    let mut last_run = 0.0;
    for r in &records {
        match r {
            StreamRecord::Frame(f) => {
                frame_idx = f.frame;
                last_run = f.run_s;
            }
            StreamRecord::Alert(a) => alerts.push((frame_idx, a.message.clone())),
        }
    }
    ensure!((last_run - 3.0).abs() < 1e-9, "final run {last_run}");
    ensure!(
        alerts == vec![(20, "wake up".to_string())],
        "expected one wake-up at frame 20 (run 2.1 s), got {alerts:?}"
    );

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut ms = 0u64;
    let mut raw = Vec::new();
    let mut stream = Vec::new();
    let mut closed = false;
    for i in 0..10_000u64 {
        ms += rng.random_range(20..150);
        if rng.random_bool(0.08) {
            closed = !closed;
        }
        let eyes = if closed {
            (None, None)
        } else {
            (
                Some(Point::new(100.0, 100.0)),
                Some(Point::new(160.0, 100.0 + rng.random_range(-12.0..12.0))),
            )
        };
        stream.push(EyeObservation::new(i, ms as f64 / 1000.0, eyes.0, eyes.1));
        raw.push((ms, closed));
    }
    let mut tracker = DrowsinessTracker::new(TrackerConfig::default()).map_err(|e| e.to_string())?;
    for (i, o) in stream.iter().enumerate() {
        let (a, _) = tracker.update(o).map_err(|e| e.to_string())?;
        let want = perclos_recount(&raw, i, 60_000);
        ensure!((a.perclos - want).abs() < 1e-12, "frame {i}: PERCLOS {} vs recount {want}", a.perclos);
    }
    let render = |rs: Vec<StreamRecord>| rs.iter().map(|r| r.to_json_line() + "\n").collect::<String>();
    let first = render(replay(TrackerConfig::default(), &stream).map_err(|e| e.to_string())?);
    let second = render(replay(TrackerConfig::default(), &stream).map_err(|e| e.to_string())?);
    ensure!(first == second, "replay output differs");
    Ok(format!(
        "one wake-up at frame 20; PERCLOS exact over 10000 frames; replay identical ({} bytes)",
        first.len()
    ))
}

const TINY_XML: &str = r#"<opencv_storage><cascade type_id="opencv-cascade-classifier">
<stageType>BOOST</stageType><featureType>HAAR</featureType><height>6</height><width>6</width>
<stages><_><maxWeakCount>1</maxWeakCount><stageThreshold>-0.2</stageThreshold><weakClassifiers>
<_><internalNodes>0 -1 0 0.25</internalNodes><leafValues>-0.5 0.75</leafValues></_>
</weakClassifiers></_></stages>
<features><_><rects><_>0 0 6 6 -1.</_><_>0 3 6 3 2.</_></rects></_></features>
</cascade></opencv_storage>"#;

fn c10_legacy() -> Result<String, String> {
    // Hand conversion: rects = -1 x (two-vertical); threshold 0.25 * 16 / -1;
    // alpha = 0.75 - (-0.5); stage threshold -0.2 - (-0.5).
    let m = parse_legacy_cascade_xml(TINY_XML.as_bytes()).map_err(|e| e.to_string())?;
    let w = m.stages[0].classifier.weaks[0];
    ensure!(m.stages.len() == 1 && m.stages[0].classifier.weaks.len() == 1, "shape");
    ensure!((m.stages[0].threshold - 0.3).abs() < 1e-12, "stage threshold {}", m.stages[0].threshold);
    ensure!((w.alpha - 1.25).abs() < 1e-12, "alpha {}", w.alpha);
    ensure!((w.weak.threshold + 4.0).abs() < 1e-12, "threshold {}", w.weak.threshold);
    ensure!(format!("{:?}", w.weak.polarity) == "Positive", "polarity {:?}", w.weak.polarity);

    let bytes = std::fs::read(data_path("haarcascade_frontalface_default.xml")).map_err(|e| e.to_string())?;
    let text = String::from_utf8_lossy(&bytes);
    let stages_in_text = text.matches("<stageThreshold>").count();
    let face = parse_legacy_cascade_xml(&bytes).map_err(|e| e.to_string())?;
    ensure!(face.stages.len() == stages_in_text, "{} stages vs {stages_in_text} in the file", face.stages.len());
    let tag = |name: &str| -> Option<usize> {
        let open = format!("<{name}>");
        let start = text.find(&open)? + open.len();
        text[start..].split('<').next()?.trim().parse().ok()
    };
    let size_in_text = (tag("width").ok_or("no <width>")?, tag("height").ok_or("no <height>")?);
    ensure!(
        (face.base_width, face.base_height) == size_in_text,
        "base window {}x{} vs {size_in_text:?} in the file",
        face.base_width,
        face.base_height
    );

    let kinds: Vec<String> = [
        TINY_XML.replace("</stages>", ""),
        TINY_XML.replace("HAAR", "LBP"),
        TINY_XML.replace("<_>0 3 6 3 2.</_>", "<_>1 1 2 2 5.</_>"),
        TINY_XML.replace("0 -1 0 0.25", "1 2 0 0.25 0 -1 0 0.1"),
        TINY_XML.replace("<stageThreshold>-0.2</stageThreshold>", ""),
    ]
    .iter()
    .map(|x| match parse_legacy_cascade_xml(x.as_bytes()) {
        Err(LegacyXmlError::Malformed(_)) => "malformed".into(),
        Err(LegacyXmlError::UnsupportedDialect(_)) => "dialect".into(),
        Err(LegacyXmlError::UnsupportedFeature(_)) => "feature".into(),
        Err(LegacyXmlError::TreeTooDeep { .. }) => "depth".into(),
        Err(LegacyXmlError::Field(_)) => "field".into(),
        other => format!("unexpected {other:?}"),
    })
    .collect();
    ensure!(
        kinds == ["malformed", "dialect", "feature", "depth", "field"],
        "error kinds {kinds:?}"
    );
    Ok(format!(
        "hand model matches; frontal-face cascade has {stages_in_text} stages, {}x{} window; 5 distinct errors",
        size_in_text.0,
        size_in_text.1
    ))
}

fn c11_bioid() -> Option<Result<String, String>> {
    let dir = std::env::var_os("BIOID_DIR")?;
    Some((|| {
        let xml = |var: &str, default: &str| {
            let path = std::env::var_os(var).map(Into::into).unwrap_or_else(|| data_path(default));
            let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_legacy_cascade_xml(&bytes).map_err(|e| e.to_string())
        };
        let face: CascadeModel = xml("BIOID_FACE_XML", "haarcascade_frontalface_default.xml")?;
        let eye: CascadeModel = xml("BIOID_EYE_XML", "haarcascade_eye.xml")?;
        let samples = load_bioid(std::path::Path::new(&dir), false).map_err(|e| e.to_string())?;
        ensure!(samples.len() == 1521, "expected 1521 images, found {}", samples.len());
        let face_params = DetectParams {
            min_size: 40,
            min_neighbors: 3,
            ..Default::default()
        };
        let results = run_pipeline(&face, &eye, &face_params, &DetectParams::default(), &samples)
            .map_err(|e| e.to_string())?;
        let report = EvalReport::from_results(&results).map_err(|e| e.to_string())?;
        println!("{report}");
        ensure!(
            report.gdr1.detected >= report.gdr3.detected,
            "GDR1 {} below GDR3 {}",
            report.gdr1.detected,
            report.gdr3.detected
        );
        Ok(format!(
            "GDR1 {:.2}%, GDR2 {:.2}%, GDR3 {:.2}% over {} images",
            report.gdr1.percentage(),
            report.gdr2.percentage(),
            report.gdr3.percentage(),
            report.gdr1.total
        ))
    })())
}

fn run(budget: Duration, check: Check) -> (Outcome, Duration) {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(check));
    let took = start.elapsed();
    let outcome = match result {
        Ok(Ok(detail)) if took <= budget => Outcome::Pass(detail),
        Ok(Ok(detail)) => Outcome::Fail(format!("{detail}; but took {took:.2?} (budget {budget:?})")),
        Ok(Err(why)) => Outcome::Fail(why),
        Err(panic) => Outcome::Fail(format!(
            "panicked: {}",
            panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default()
        )),
    };
    (outcome, took)
}

fn main() {
    let secs = Duration::from_secs;
    let checks: [(u32, &str, Duration, Check); 10] = [
        (1, "metric reproduction", secs(1), c1_metrics),
        (2, "rule engine truth table", secs(1), c2_rules),
        (3, "pitch geometry", secs(1), c3_pitch),
        (4, "integral image oracle", secs(10), c4_integral),
        (5, "Haar feature oracle", secs(10), c5_features),
        (6, "AdaBoost", secs(30), c6_adaboost),
        (7, "cascade properties", secs(30), c7_cascade),
        (8, "end-to-end surrogate detection", secs(300), c8_end_to_end),
        (9, "tracker", secs(30), c9_tracker),
        (10, "legacy XML import", secs(5), c10_legacy),
    ];
    let mut failed = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome, took: Duration| {
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("criterion {id:>2} {tag} [{took:>9.2?}] {name}: {detail}");
    };
    for (id, name, budget, check) in checks {
        let (outcome, took) = run(budget, check);
        report(id, name, outcome, took);
    }
    let start = Instant::now();
    match c11_bioid() {
        None => report(
            11,
            "BioID evaluation",
            Outcome::Skip("set BIOID_DIR to the BioID directory to run".into()),
            Duration::ZERO,
        ),
        Some(result) => {
            let took = start.elapsed();
            let outcome = match result {
                Ok(d) if took <= secs(900) => Outcome::Pass(d),
                Ok(d) => Outcome::Fail(format!("{d}; but took {took:.2?} (budget 15 min)")),
                Err(e) => Outcome::Fail(e),
            };
            report(11, "BioID evaluation", outcome, took);
        }
    }
    if failed > 0 {
        eprintln!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
