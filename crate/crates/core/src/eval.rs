//! BioID loading, eye-localization correctness and good-detection rates.
//!
//! Three rates are reported per dataset run:
//!
//! * GDR1: images whose two detected eyes both match the annotation;
//! * GDR2: images on which a head pitch could be computed;
//! * GDR3: images satisfying both of the above.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::{detect_eyes_in_face, detect_in_region, CascadeError, CascadeModel, DetectParams};
use crate::drowsiness::{compute_pitch, Point};
use crate::imaging::{decode_pgm, GrayImage, ImagingError, IntegralImage};

/// Largest normalized eye error still counted as a correct localization.
pub const EYE_MATCH_TOLERANCE: f64 = 0.25;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: ImagingError,
    },
    #[error("{path}: malformed eye file: {reason}")]
    MalformedEye { path: PathBuf, reason: String },
    #[error("sample {id} has no {missing} file")]
    MissingPair { id: String, missing: &'static str },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("detection failed on {id}: {source}")]
    Detection {
        id: String,
        #[source]
        source: CascadeError,
    },
}

/// Annotated eye centers, ordered so that `left.x < right.x` in the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeTruth {
    pub left: Point,
    pub right: Point,
}

impl EyeTruth {
    /// Orders two points by image x.
    pub fn canonical(a: Point, b: Point) -> Self {
        if b.x < a.x {
            EyeTruth { left: b, right: a }
        } else {
            EyeTruth { left: a, right: b }
        }
    }

    pub fn inter_eye_distance(&self) -> f64 {
        self.left.distance(&self.right)
    }
}

#[derive(Debug, Clone)]
pub struct BioidSample {
    pub id: String,
    pub image: GrayImage,
    pub truth: EyeTruth,
}

/// Parses the body of a `.eye` file: a header line, then `LX LY RX RY`.
pub fn parse_eye_file(text: &str) -> Result<EyeTruth, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("file is empty")?;
    if !header.trim_start().starts_with('#') {
        return Err(format!("expected a '#' header line, found {header:?}"));
    }
    let body = lines.next().ok_or("no coordinate line after the header")?;
    let nums = body
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if nums.len() != 4 {
        return Err(format!("expected 4 coordinates, found {}", nums.len()));
    }
    if nums.iter().any(|v| !v.is_finite()) {
        return Err("non-finite coordinate".into());
    }
    if let Some(extra) = lines.next() {
        return Err(format!("unexpected trailing line {extra:?}"));
    }
    Ok(EyeTruth::canonical(Point::new(nums[0], nums[1]), Point::new(nums[2], nums[3])))
}

fn read(path: &Path) -> Result<Vec<u8>, EvalError> {
    fs::read(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_pair(dir: &Path, id: &str) -> Result<BioidSample, EvalError> {
    let img_path = dir.join(format!("{id}.pgm"));
    let eye_path = dir.join(format!("{id}.eye"));
    let image = decode_pgm(&read(&img_path)?).map_err(|source| EvalError::Image {
        path: img_path.clone(),
        source,
    })?;
    let text = String::from_utf8_lossy(&read(&eye_path)?).into_owned();
    let malformed = |reason: String| EvalError::MalformedEye {
        path: eye_path.clone(),
        reason,
    };
    let truth = parse_eye_file(&text).map_err(malformed)?;
    let inside = |p: &Point| p.x >= 0.0 && p.y >= 0.0 && p.x < image.width() as f64 && p.y < image.height() as f64;
    if !(inside(&truth.left) && inside(&truth.right)) {
        return Err(malformed(format!(
            "eye outside the {}x{} image",
            image.width(),
            image.height()
        )));
    }
    if truth.inter_eye_distance() == 0.0 {
        return Err(malformed("both eyes at the same point".into()));
    }
    Ok(BioidSample {
        id: id.to_string(),
        image,
        truth,
    })
}

/// Loads every `<id>.pgm` / `<id>.eye` pair of a flat directory, sorted by id.
///
/// Unpaired files are skipped with a warning, or fail when `strict` is set.
/// Unreadable or malformed files always fail.
pub fn load_bioid(dir: &Path, strict: bool) -> Result<Vec<BioidSample>, EvalError> {
    let entries = fs::read_dir(dir).map_err(|source| EvalError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut pgm = std::collections::BTreeSet::new();
    let mut eye = std::collections::BTreeSet::new();
    for entry in entries {
        let path = entry
            .map_err(|source| EvalError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        let (Some(stem), Some(ext)) = (path.file_stem(), path.extension()) else {
            continue;
        };
        let stem = stem.to_string_lossy().into_owned();
        match ext.to_string_lossy().to_ascii_lowercase().as_str() {
            "pgm" => pgm.insert(stem),
            "eye" => eye.insert(stem),
            _ => false,
        };
    }
    let mut ids = Vec::new();
    for id in pgm.union(&eye) {
        let missing = match (pgm.contains(id), eye.contains(id)) {
            (true, true) => {
                ids.push(id.clone());
                continue;
            }
            (true, false) => ".eye",
            _ => ".pgm",
        };
        if strict {
            return Err(EvalError::MissingPair {
                id: id.clone(),
                missing,
            });
        }
        log::warn!("skipping {id}: no {missing} file");
    }
    let samples = ids
        .par_iter()
        .map(|id| load_pair(dir, id))
        .collect::<Result<Vec<_>, _>>()?;
    log::info!("loaded {} samples from {}", samples.len(), dir.display());
    Ok(samples)
}

/// Worst per-eye error divided by the true inter-eye distance.
pub fn eye_match_error(detected: &EyeTruth, truth: &EyeTruth) -> f64 {
    let dl = detected.left.distance(&truth.left);
    let dr = detected.right.distance(&truth.right);
    dl.max(dr) / truth.inter_eye_distance()
}

/// Correct localization: [`eye_match_error`] at most [`EYE_MATCH_TOLERANCE`].
pub fn eye_match(detected: &EyeTruth, truth: &EyeTruth) -> bool {
    eye_match_error(detected, truth) <= EYE_MATCH_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GdrReport {
    pub name: String,
    pub detected: usize,
    pub total: usize,
    pub flags: Vec<bool>,
}

impl GdrReport {
    pub fn from_flags(name: &str, flags: Vec<bool>) -> Result<Self, EvalError> {
        if flags.is_empty() {
            return Err(EvalError::EmptyDataset);
        }
        Ok(GdrReport {
            name: name.to_string(),
            detected: flags.iter().filter(|&&f| f).count(),
            total: flags.len(),
            flags,
        })
    }

    /// Unrounded percentage.
    pub fn percentage(&self) -> f64 {
        100.0 * self.detected as f64 / self.total as f64
    }
}

/// Outcome of the pipeline on one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub face_found: bool,
    pub left_eye: Option<Point>,
    pub right_eye: Option<Point>,
    /// Normalized eye error when both eyes were found.
    pub eye_error: Option<f64>,
    pub pitch_deg: Option<f64>,
}

impl SampleResult {
    pub fn eyes_match(&self) -> bool {
        self.eye_error.is_some_and(|e| e <= EYE_MATCH_TOLERANCE)
    }

    pub fn pose_found(&self) -> bool {
        self.pitch_deg.is_some()
    }
}

pub fn compute_gdr1(results: &[SampleResult]) -> Result<GdrReport, EvalError> {
    GdrReport::from_flags("GDR1", results.iter().map(SampleResult::eyes_match).collect())
}

pub fn compute_gdr2(results: &[SampleResult]) -> Result<GdrReport, EvalError> {
    GdrReport::from_flags("GDR2", results.iter().map(SampleResult::pose_found).collect())
}

pub fn compute_gdr3(results: &[SampleResult]) -> Result<GdrReport, EvalError> {
    GdrReport::from_flags(
        "GDR3",
        results.iter().map(|r| r.eyes_match() && r.pose_found()).collect(),
    )
}

/// Runs face then eye detection on one sample.
///
/// The best-scoring face is used; eye centers are in image coordinates.
pub fn evaluate_sample(
    face_model: &CascadeModel,
    eye_model: &CascadeModel,
    face_params: &DetectParams,
    eye_params: &DetectParams,
    sample: &BioidSample,
) -> Result<SampleResult, CascadeError> {
    let ii = IntegralImage::new(&sample.image);
    let faces = detect_in_region(face_model, &ii, sample.image.bounds(), face_params)?;
    let mut result = SampleResult {
        face_found: false,
        left_eye: None,
        right_eye: None,
        eye_error: None,
        pitch_deg: None,
    };
    let Some(face) = faces.first() else {
        return Ok(result);
    };
    result.face_found = true;
    let pair = detect_eyes_in_face(eye_model, &ii, face.rect, eye_params)?;
    let center = |d: &crate::cascade::Detection| {
        let (x, y) = d.center();
        Point::new(x, y)
    };
    result.left_eye = pair.left.as_ref().map(center);
    result.right_eye = pair.right.as_ref().map(center);
    if let (Some(l), Some(r)) = (result.left_eye, result.right_eye) {
        result.eye_error = Some(eye_match_error(&EyeTruth { left: l, right: r }, &sample.truth));
        result.pitch_deg = compute_pitch(l, r).ok();
    }
    Ok(result)
}

/// Evaluates every sample in parallel; results keep the input order.
pub fn run_pipeline(
    face_model: &CascadeModel,
    eye_model: &CascadeModel,
    face_params: &DetectParams,
    eye_params: &DetectParams,
    samples: &[BioidSample],
) -> Result<Vec<SampleResult>, EvalError> {
    samples
        .par_iter()
        .map(|s| {
            evaluate_sample(face_model, eye_model, face_params, eye_params, s).map_err(|source| {
                EvalError::Detection {
                    id: s.id.clone(),
                    source,
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub test: String,
    pub approach: String,
    pub detected: usize,
    pub total: usize,
    pub gdr_percent: f64,
}

/// The three-test comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<TableRow>,
    pub gdr1: GdrReport,
    pub gdr2: GdrReport,
    pub gdr3: GdrReport,
}

impl EvalReport {
    pub fn from_results(results: &[SampleResult]) -> Result<Self, EvalError> {
        Self::from_reports(compute_gdr1(results)?, compute_gdr2(results)?, compute_gdr3(results)?)
    }

    pub fn from_reports(gdr1: GdrReport, gdr2: GdrReport, gdr3: GdrReport) -> Result<Self, EvalError> {
        let row = |test: &str, approach: &str, r: &GdrReport| TableRow {
            test: test.into(),
            approach: approach.into(),
            detected: r.detected,
            total: r.total,
            gdr_percent: r.percentage(),
        };
        Ok(EvalReport {
            rows: vec![
                row("Test1", "eye detection", &gdr1),
                row("Test2", "head pose", &gdr2),
                row("Test3", "eye detection and head pose", &gdr3),
            ],
            gdr1,
            gdr2,
            gdr3,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        writeln!(s, "{:<6} {:<28} {:>9} {:>6} {:>8}", "test", "approach", "detected", "total", "GDR %")?;
        for r in &self.rows {
            writeln!(
                s,
                "{:<6} {:<28} {:>9} {:>6} {:>8.2}",
                r.test, r.approach, r.detected, r.total, r.gdr_percent
            )?;
        }
        f.write_str(&s)
    }
}
