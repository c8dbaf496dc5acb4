//! Deterministic inputs shared by the benchmarks.

use std::path::{Path, PathBuf};

use blinkwatch_core::cascade::{parse_legacy_cascade_xml, CascadeModel};
use blinkwatch_core::drowsiness::{EyeObservation, Point};
use blinkwatch_core::imaging::{decode_pgm, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Frame size of the BioID images.
pub const FRAME: (usize, usize) = (384, 286);

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

pub fn noise_image(seed: u64, w: usize, h: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random())
}

pub fn astronaut() -> GrayImage {
    decode_pgm(&std::fs::read(data_path("astronaut.pgm")).expect("test image")).expect("valid PGM")
}

pub fn cascade(name: &str) -> CascadeModel {
    parse_legacy_cascade_xml(&std::fs::read(data_path(name)).expect("cascade file")).expect("valid cascade")
}

/// Alternating open and closed stretches at 25 fps.
pub fn eye_stream(n: usize) -> Vec<EyeObservation> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut closed = false;
    (0..n)
        .map(|i| {
            if rng.random_bool(0.05) {
                closed = !closed;
            }
            let t = i as f64 / 25.0;
            if closed {
                EyeObservation::new(i as u64, t, None, None)
            } else {
                let dy = rng.random_range(-10.0..10.0);
                EyeObservation::new(i as u64, t, Some(Point::new(150.0, 110.0)), Some(Point::new(220.0, 110.0 + dy)))
            }
        })
        .collect()
}
