//! Brute-force oracles shared by the integration suites and the acceptance
//! harness. Each one recomputes a quantity from first principles, without
//! going through the library's fast paths.

#![allow(dead_code)]

use std::path::PathBuf;

use blinkwatch_core::cascade::{CascadeModel, CascadeStage};
use blinkwatch_core::haarboost::{
    FeatureKind, HaarFeature, Label, Polarity, StrongClassifier, WeakClassifier, WeightedWeak,
};
use blinkwatch_core::imaging::{GrayImage, Rect};
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn random_image<R: Rng>(rng: &mut R, w: usize, h: usize) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random())
}

pub fn random_rect<R: Rng>(rng: &mut R, w: usize, h: usize) -> Rect {
    let x = rng.random_range(0..w);
    let y = rng.random_range(0..h);
    let rw = rng.random_range(1..=w - x);
    let rh = rng.random_range(1..=h - y);
    Rect::new(x, y, rw, rh)
}

pub fn brute_sum(img: &GrayImage, r: Rect) -> u64 {
    let mut s = 0;
    for y in r.y..r.bottom() {
        for x in r.x..r.right() {
            s += img.get(x, y) as u64;
        }
    }
    s
}

/// Two-pass mean and population variance.
pub fn brute_stats(img: &GrayImage, r: Rect) -> (f64, f64) {
    let n = r.area() as f64;
    let mean = brute_sum(img, r) as f64 / n;
    let mut var = 0.0;
    for y in r.y..r.bottom() {
        for x in r.x..r.right() {
            let d = img.get(x, y) as f64 - mean;
            var += d * d;
        }
    }
    (mean, var / n)
}

fn kind_layout(kind: FeatureKind) -> (usize, usize, &'static [f64]) {
    match kind {
        FeatureKind::TwoHorizontal => (2, 1, &[1.0, -1.0]),
        FeatureKind::TwoVertical => (1, 2, &[1.0, -1.0]),
        FeatureKind::ThreeHorizontal => (3, 1, &[1.0, -2.0, 1.0]),
        FeatureKind::ThreeVertical => (1, 3, &[1.0, -2.0, 1.0]),
        FeatureKind::Checkerboard => (2, 2, &[1.0, -1.0, -1.0, 1.0]),
    }
}

/// Pixel-by-pixel feature value of `f` scaled by `scale` about the window
/// origin `(ox, oy)`.
///
/// Cell edges sit at `round(scale * (start + len * i / cells))`; each pixel
/// is assigned to the cell containing it, and the first cell's weight is
/// rebalanced so the weighted areas cancel. Returns `None` if a cell
/// collapses to zero pixels.
pub fn brute_feature(f: &HaarFeature, img: &GrayImage, ox: usize, oy: usize, scale: f64) -> Option<f64> {
    let (cx, cy, weights) = kind_layout(f.kind);
    let edge = |start: u16, len: u16, cells: usize, i: usize| -> i64 {
        let base = start as usize + len as usize * i / cells;
        (base as f64 * scale).round() as i64
    };
    let xs: Vec<i64> = (0..=cx).map(|i| edge(f.x, f.w, cx, i)).collect();
    let ys: Vec<i64> = (0..=cy).map(|i| edge(f.y, f.h, cy, i)).collect();
    let mut sums = vec![0.0; cx * cy];
    let mut areas = vec![0usize; cx * cy];
    for py in ys[0]..ys[cy] {
        for px in xs[0]..xs[cx] {
            let i = (0..cx).find(|&i| px >= xs[i] && px < xs[i + 1]).unwrap();
            let j = (0..cy).find(|&j| py >= ys[j] && py < ys[j + 1]).unwrap();
            let cell = j * cx + i;
            sums[cell] += img.get(ox + px as usize, oy + py as usize) as f64;
            areas[cell] += 1;
        }
    }
    if areas.contains(&0) {
        return None;
    }
    let mut w = weights.to_vec();
    let rest: f64 = (1..w.len()).map(|c| w[c] * areas[c] as f64).sum();
    w[0] = -rest / areas[0] as f64;
    Some(sums.iter().zip(&w).map(|(s, w)| s * w).sum())
}

pub fn random_feature<R: Rng>(rng: &mut R, base_w: usize, base_h: usize) -> HaarFeature {
    loop {
        let kind = FeatureKind::ALL[rng.random_range(0..5)];
        let (cx, cy, _) = kind_layout(kind);
        if cx > base_w || cy > base_h {
            continue;
        }
        let w = cx * rng.random_range(1..=base_w / cx);
        let h = cy * rng.random_range(1..=base_h / cy);
        let x = rng.random_range(0..=base_w - w);
        let y = rng.random_range(0..=base_h - h);
        return HaarFeature::new(kind, x as u16, y as u16, w as u16, h as u16).unwrap();
    }
}

/// Weighted error of the stump `(threshold, polarity)`.
pub fn stump_error(values: &[f64], labels: &[Label], weights: &[f64], threshold: f64, polarity: Polarity) -> f64 {
    values
        .iter()
        .zip(labels)
        .zip(weights)
        .filter(|((&v, &l), _)| {
            let predicted = polarity.sign() * v < polarity.sign() * threshold;
            predicted != (l == Label::Positive)
        })
        .map(|(_, &w)| w)
        .sum()
}

/// Minimum weighted error over every threshold position and both polarities.
pub fn exhaustive_stump_error(values: &[f64], labels: &[Label], weights: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut cands = vec![sorted[0] - 1.0, sorted[sorted.len() - 1] + 1.0];
    cands.extend(sorted.windows(2).map(|p| (p[0] + p[1]) / 2.0));
    let mut best = f64::INFINITY;
    for t in cands {
        for p in [Polarity::Positive, Polarity::Negative] {
            best = best.min(stump_error(values, labels, weights, t, p));
        }
    }
    best
}

/// Closed-frame share of the frames in `[t - window, t]`, with times given in
/// integer milliseconds; frames exactly `window` old are out.
pub fn perclos_recount(stream: &[(u64, bool)], upto: usize, window_ms: u64) -> f64 {
    let now = stream[upto].0;
    let inside: Vec<bool> = stream[..=upto]
        .iter()
        .filter(|(t, _)| now - t < window_ms)
        .map(|&(_, c)| c)
        .collect();
    inside.iter().filter(|&&c| c).count() as f64 / inside.len() as f64
}

/// A random multi-stage cascade whose stage thresholds sit strictly inside
/// `(0, sum of alphas)`, so each stage both accepts and rejects.
pub fn random_cascade<R: Rng>(rng: &mut R, base_w: usize, base_h: usize, stages: usize) -> CascadeModel {
    let stages = (0..stages)
        .map(|_| {
            let weaks: Vec<WeightedWeak> = (0..rng.random_range(1..5))
                .map(|_| WeightedWeak {
                    alpha: rng.random_range(0.1..2.0),
                    weak: WeakClassifier {
                        feature: random_feature(rng, base_w, base_h),
                        threshold: rng.random_range(-3.0..3.0),
                        polarity: if rng.random_bool(0.5) {
                            Polarity::Positive
                        } else {
                            Polarity::Negative
                        },
                    },
                })
                .collect();
            let sc = StrongClassifier::new(weaks);
            let threshold = sc.alpha_sum() * rng.random_range(0.2..0.8);
            CascadeStage::new(sc, threshold)
        })
        .collect();
    CascadeModel::new(base_w, base_h, stages).unwrap()
}

/// Smooth blobs with noise: structure at several scales so random cascades
/// see both accepting and rejecting windows.
pub fn textured_image<R: Rng>(rng: &mut R, w: usize, h: usize) -> GrayImage {
    let blobs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.random_range(0.0..w as f64),
                rng.random_range(0.0..h as f64),
                rng.random_range(3.0..15.0),
                rng.random_range(-120.0..120.0),
            )
        })
        .collect();
    GrayImage::from_fn(w, h, |x, y| {
        let mut v = 128.0;
        for &(bx, by, r, a) in &blobs {
            let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
            v += a * (-d2 / (r * r)).exp();
        }
        (v + rng.random_range(-20.0..20.0)).clamp(0.0, 255.0) as u8
    })
}
