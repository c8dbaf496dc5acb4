//! Procedural eye-surrogate data: a dark horizontal bar on a bright
//! surround, plus background clutter for negatives.
//!
//! Everything is driven by a caller-supplied RNG so datasets are
//! reproducible from a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imaging::{GrayImage, Rect};

pub const SURROGATE_WIDTH: usize = 16;
pub const SURROGATE_HEIGHT: usize = 8;

fn clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn noise<R: Rng>(rng: &mut R, amp: f64) -> f64 {
    rng.random_range(-amp..=amp)
}

/// Paints a filled ellipse of value `v` centered at `(cx, cy)`, blending the
/// one-pixel rim for soft edges.
fn ellipse(img: &mut GrayImage, cx: f64, cy: f64, ax: f64, ay: f64, v: f64) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            let dx = (x as f64 + 0.5 - cx) / ax;
            let dy = (y as f64 + 0.5 - cy) / ay;
            let r = (dx * dx + dy * dy).sqrt();
            if r < 1.25 {
                let t = ((1.25 - r) / 0.5).clamp(0.0, 1.0);
                let old = img.get(x, y) as f64;
                img.set(x, y, clamp_u8(old + (v - old) * t));
            }
        }
    }
}

fn add_noise<R: Rng>(img: &mut GrayImage, rng: &mut R, amp: f64) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(x, y) as f64 + noise(rng, amp);
            img.set(x, y, clamp_u8(v));
        }
    }
}

/// One positive patch of `SURROGATE_WIDTH x SURROGATE_HEIGHT`.
pub fn eye_surrogate<R: Rng>(rng: &mut R) -> GrayImage {
    let bright = rng.random_range(150.0..225.0);
    let dark = rng.random_range(15.0..80.0);
    let mut img = GrayImage::filled(SURROGATE_WIDTH, SURROGATE_HEIGHT, clamp_u8(bright));
    let cx = SURROGATE_WIDTH as f64 / 2.0 + rng.random_range(-1.0..=1.0);
    let cy = SURROGATE_HEIGHT as f64 / 2.0 + rng.random_range(-0.5..=0.5);
    let ax = rng.random_range(4.5..6.0);
    let ay = rng.random_range(1.8..2.6);
    ellipse(&mut img, cx, cy, ax, ay, dark);
    let amp = rng.random_range(2.0..12.0);
    add_noise(&mut img, rng, amp);
    img
}

/// One background patch of arbitrary size, drawn from a mix of clutter
/// kinds: flat, gradients, boxes, texture, misplaced or mis-sized blobs,
/// vertical bars and inverted bars.
pub fn background_patch<R: Rng>(rng: &mut R, w: usize, h: usize) -> GrayImage {
    let base = rng.random_range(20.0..235.0);
    let mut img = GrayImage::filled(w, h, clamp_u8(base));
    let (wf, hf) = (w as f64, h as f64);
    match rng.random_range(0..9) {
        0 => {}
        1 => {
            let (gx, gy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let span = rng.random_range(20.0..160.0);
            img = GrayImage::from_fn(w, h, |x, y| {
                clamp_u8(base + span * (gx * (x as f64 / wf - 0.5) + gy * (y as f64 / hf - 0.5)))
            });
        }
        2 => {
            for _ in 0..rng.random_range(1..4) {
                let rw = rng.random_range(1..=w);
                let rh = rng.random_range(1..=h);
                let r = Rect::new(rng.random_range(0..=w - rw), rng.random_range(0..=h - rh), rw, rh);
                let v = clamp_u8(rng.random_range(0.0..255.0));
                let block = GrayImage::filled(r.w, r.h, v);
                img.blit(&block, r.x, r.y);
            }
        }
        3 => {
            img = GrayImage::from_fn(w, h, |_, _| rng.random_range(0..=255u8));
        }
        4 => {
            // Dark blob away from the center.
            let side = if rng.random_bool(0.5) { 0.15 } else { 0.85 };
            let cx = wf * (side + rng.random_range(-0.1..0.1));
            let cy = hf * rng.random_range(0.2..0.8);
            let bright = rng.random_range(140.0..225.0);
            img = GrayImage::filled(w, h, clamp_u8(bright));
            ellipse(&mut img, cx, cy, wf * rng.random_range(0.1..0.35), hf * rng.random_range(0.15..0.35), rng.random_range(10.0..90.0));
        }
        5 => {
            // Centered blob that is far too small or too large.
            let bright = rng.random_range(140.0..225.0);
            img = GrayImage::filled(w, h, clamp_u8(bright));
            let k = if rng.random_bool(0.5) {
                rng.random_range(0.05..0.15)
            } else {
                rng.random_range(0.6..0.9)
            };
            ellipse(&mut img, wf / 2.0, hf / 2.0, wf * k, hf * k * 1.6, rng.random_range(10.0..90.0));
        }
        6 => {
            // Vertical dark bar.
            let bright = rng.random_range(140.0..225.0);
            img = GrayImage::filled(w, h, clamp_u8(bright));
            let cx = wf * rng.random_range(0.2..0.8);
            ellipse(&mut img, cx, hf / 2.0, wf * rng.random_range(0.06..0.15), hf * rng.random_range(0.4..0.7), rng.random_range(10.0..90.0));
        }
        7 => {
            // Bright bar on a dark surround.
            let dark = rng.random_range(15.0..90.0);
            img = GrayImage::filled(w, h, clamp_u8(dark));
            ellipse(&mut img, wf / 2.0, hf / 2.0, wf * rng.random_range(0.25..0.4), hf * rng.random_range(0.2..0.35), rng.random_range(150.0..240.0));
        }
        _ => {
            // Horizontal step edge.
            let row = rng.random_range(1..h.max(2));
            let other = clamp_u8(rng.random_range(0.0..255.0));
            for y in row..h {
                for x in 0..w {
                    img.set(x, y, other);
                }
            }
        }
    }
    let amp = rng.random_range(0.0..15.0);
    add_noise(&mut img, rng, amp);
    img
}

/// A base-size window that cuts through an eye surrogate without framing
/// it: the surrogate is rescaled and shifted so its overlap (IoU) with the
/// window stays below `max_iou`.
pub fn misaligned_surrogate<R: Rng>(rng: &mut R, max_iou: f64) -> GrayImage {
    let (w, h) = (SURROGATE_WIDTH as f64, SURROGATE_HEIGHT as f64);
    let eye = eye_surrogate(rng);
    loop {
        let k = rng.random_range(0.4f64..2.5).max(0.4);
        let (rw, rh) = (w * k, h * k);
        let rx = rng.random_range(-rw..w);
        let ry = rng.random_range(-rh..h);
        let ix = (rx + rw).min(w) - rx.max(0.0);
        let iy = (ry + rh).min(h) - ry.max(0.0);
        if ix <= 0.0 || iy <= 0.0 {
            continue;
        }
        let inter = ix * iy;
        if inter / (w * h + rw * rh - inter) >= max_iou {
            continue;
        }
        let fill = rng.random_range(20.0..235.0);
        let mut img = GrayImage::from_fn(SURROGATE_WIDTH, SURROGATE_HEIGHT, |x, y| {
            let u = (x as f64 + 0.5 - rx) / k;
            let v = (y as f64 + 0.5 - ry) / k;
            if u >= 0.0 && v >= 0.0 && u < w && v < h {
                eye.get(u as usize, v as usize)
            } else {
                clamp_u8(fill)
            }
        });
        let amp = rng.random_range(0.0..6.0);
        add_noise(&mut img, rng, amp);
        return img;
    }
}

/// A large smooth background for planting targets: a gentle gradient with
/// mild texture.
pub fn background_image<R: Rng>(rng: &mut R, w: usize, h: usize) -> GrayImage {
    let base = rng.random_range(90.0..170.0);
    let (gx, gy) = (rng.random_range(-40.0..40.0), rng.random_range(-40.0..40.0));
    let amp = rng.random_range(2.0..8.0);
    GrayImage::from_fn(w, h, |x, y| {
        clamp_u8(base + gx * (x as f64 / w as f64 - 0.5) + gy * (y as f64 / h as f64 - 0.5) + noise(rng, amp))
    })
}

/// Writes `patch`, resized to `at`'s size, into `image` at `at`.
pub fn plant(image: &mut GrayImage, patch: &GrayImage, at: Rect) {
    let scaled = patch.resize_nearest(at.w, at.h);
    image.blit(&scaled, at.x, at.y);
}

#[derive(Debug, Clone)]
pub struct SurrogateSet {
    pub positives: Vec<GrayImage>,
    pub negatives: Vec<GrayImage>,
}

/// Share of negatives cut from misaligned surrogates.
pub const MISALIGNED_SHARE: f64 = 0.4;

/// IoU below which a surrogate counts as not framed by a window.
pub const MISALIGNED_MAX_IOU: f64 = 0.35;

/// `n_pos` eye surrogates and `n_neg` base-size negatives (background
/// clutter and misaligned surrogates) from a seeded generator.
pub fn surrogate_dataset(seed: u64, n_pos: usize, n_neg: usize) -> SurrogateSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positives = (0..n_pos).map(|_| eye_surrogate(&mut rng)).collect();
    let negatives = (0..n_neg).map(|_| negative_patch(&mut rng)).collect();
    SurrogateSet { positives, negatives }
}

/// One base-size negative: clutter, or a misaligned surrogate with
/// probability [`MISALIGNED_SHARE`].
pub fn negative_patch<R: Rng>(rng: &mut R) -> GrayImage {
    if rng.random_bool(MISALIGNED_SHARE) {
        misaligned_surrogate(rng, MISALIGNED_MAX_IOU)
    } else {
        background_patch(rng, SURROGATE_WIDTH, SURROGATE_HEIGHT)
    }
}

/// A `cols x rows` mosaic of negative tiles.
///
/// Surrogate fragments are clipped to their tile, so no window of the
/// scene frames a complete surrogate; windows straddling tile borders add
/// further clutter.
pub fn negative_scene<R: Rng>(rng: &mut R, cols: usize, rows: usize) -> GrayImage {
    let mut img = GrayImage::filled(cols * SURROGATE_WIDTH, rows * SURROGATE_HEIGHT, 0);
    for r in 0..rows {
        for c in 0..cols {
            let tile = negative_patch(rng);
            img.blit(&tile, c * SURROGATE_WIDTH, r * SURROGATE_HEIGHT);
        }
    }
    img
}

/// `n` seeded negative scenes of 4 x 4 tiles.
pub fn negative_scenes(seed: u64, n: usize) -> Vec<GrayImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| negative_scene(&mut rng, 4, 4)).collect()
}
