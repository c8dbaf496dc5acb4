use blinkwatch_core::cascade::{detect_eyes_in_face, detect_multiscale, CascadeModel, Detection, EyePair};
use blinkwatch_core::drowsiness::{compute_pitch, Point};
use blinkwatch_core::imaging::{GrayImage, IntegralImage};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;

pub struct Models {
    pub face: CascadeModel,
    pub eye: CascadeModel,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub face: Option<Detection>,
    pub left_eye: Option<Detection>,
    pub right_eye: Option<Detection>,
    pub pitch_deg: Option<f64>,
}

fn center(d: &Detection) -> Point {
    let (x, y) = d.center();
    Point::new(x, y)
}

impl Analysis {
    pub fn left_center(&self) -> Option<Point> {
        self.left_eye.as_ref().map(center)
    }

    pub fn right_center(&self) -> Option<Point> {
        self.right_eye.as_ref().map(center)
    }
}

/// Best face, then the best eye on each side of it, then pitch from the eye centers.
pub fn analyze(models: &Models, cfg: &RunConfig, image: &GrayImage) -> Result<Analysis> {
    let faces = detect_multiscale(&models.face, image, &cfg.face)?;
    let Some(face) = faces.first().copied() else {
        return Ok(Analysis {
            face: None,
            left_eye: None,
            right_eye: None,
            pitch_deg: None,
        });
    };
    let ii = IntegralImage::new(image);
    let EyePair { left, right } = detect_eyes_in_face(&models.eye, &ii, face.rect, &cfg.eye)?;
    let pitch_deg = match (&left, &right) {
        (Some(l), Some(r)) => compute_pitch(center(l), center(r)).ok(),
        _ => None,
    };
    Ok(Analysis {
        face: Some(face),
        left_eye: left,
        right_eye: right,
        pitch_deg,
    })
}
