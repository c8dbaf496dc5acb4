use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CascadeError, CascadeModel, ScaledCascade};
use crate::imaging::{GrayImage, IntegralImage, Rect};

/// Candidates overlapping a kept detection by more than this IoU are dropped.
pub const NMS_IOU: f64 = 0.3;

/// Upper bound on pyramid levels, reached only with a scale factor barely above 1.
const MAX_SCALES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    /// Ratio between consecutive window sizes; must exceed 1.
    pub scale_factor: f64,
    /// Window step as a fraction of the window width, in (0, 1].
    pub step_fraction: f64,
    /// Smallest window width in pixels; 0 means the base window.
    pub min_size: usize,
    /// Largest window width in pixels; 0 means no limit.
    pub max_size: usize,
    /// Survivors of NMS must have absorbed at least this many other
    /// candidates. 0 keeps every survivor.
    pub min_neighbors: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        DetectParams {
            scale_factor: 1.2,
            step_fraction: 0.05,
            min_size: 0,
            max_size: 0,
            min_neighbors: 0,
        }
    }
}

impl DetectParams {
    pub fn validate(&self) -> Result<(), CascadeError> {
        if !(self.scale_factor.is_finite() && self.scale_factor > 1.0) {
            return Err(CascadeError::BadParams(format!(
                "scale factor must exceed 1, got {}",
                self.scale_factor
            )));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction <= 1.0) {
            return Err(CascadeError::BadParams(format!(
                "step fraction must be in (0, 1], got {}",
                self.step_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub rect: Rect,
    /// Final-stage margin: vote total minus stage threshold.
    pub score: f64,
    pub scale: f64,
    /// Raw candidates absorbed by this one during NMS.
    pub neighbors: usize,
}

impl Detection {
    pub fn center(&self) -> (f64, f64) {
        self.rect.center()
    }
}

/// Output order: score descending, then x, y, w, h ascending.
fn detection_order(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.rect.x.cmp(&b.rect.x))
        .then(a.rect.y.cmp(&b.rect.y))
        .then(a.rect.w.cmp(&b.rect.w))
        .then(a.rect.h.cmp(&b.rect.h))
}

/// Greedy NMS: keep the best remaining candidate, drop everything that
/// overlaps it by more than `iou`, repeat.
pub fn non_max_suppression(mut candidates: Vec<Detection>, iou: f64) -> Vec<Detection> {
    candidates.sort_by(detection_order);
    let mut suppressed = vec![false; candidates.len()];
    let mut kept = Vec::new();
    for i in 0..candidates.len() {
        if suppressed[i] {
            continue;
        }
        let mut keep = candidates[i];
        for j in i + 1..candidates.len() {
            if !suppressed[j] && keep.rect.iou(&candidates[j].rect) > iou {
                suppressed[j] = true;
                keep.neighbors += 1;
            }
        }
        kept.push(keep);
    }
    kept
}

/// Scales whose window fits a `w x h` region.
fn pyramid(model: &CascadeModel, params: &DetectParams, w: usize, h: usize) -> Vec<f64> {
    let mut s = (params.min_size as f64 / model.base_width as f64).max(1.0);
    let mut out = Vec::new();
    while out.len() < MAX_SCALES {
        let (ww, wh) = model.window_at(s);
        if ww > w || wh > h || (params.max_size > 0 && ww > params.max_size) {
            break;
        }
        out.push(s);
        s *= params.scale_factor;
    }
    out
}

/// Multi-scale sliding-window detection over the whole image.
pub fn detect_multiscale(
    model: &CascadeModel,
    image: &GrayImage,
    params: &DetectParams,
) -> Result<Vec<Detection>, CascadeError> {
    let ii = IntegralImage::new(image);
    detect_in_region(model, &ii, image.bounds(), params)
}

/// Detection restricted to windows lying inside `region`.
///
/// Rows of every scale are scanned in parallel; candidates are put in a
/// fixed order before NMS, so the result does not depend on the worker count.
pub fn detect_in_region(
    model: &CascadeModel,
    ii: &IntegralImage,
    region: Rect,
    params: &DetectParams,
) -> Result<Vec<Detection>, CascadeError> {
    params.validate()?;
    if !region.fits(ii.width(), ii.height()) {
        return Err(CascadeError::WindowOutOfBounds {
            window: region,
            width: ii.width(),
            height: ii.height(),
        });
    }
    let cascades = pyramid(model, params, region.w, region.h)
        .into_iter()
        .map(|s| ScaledCascade::new(model, s))
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for (ci, sc) in cascades.iter().enumerate() {
        let (ww, wh) = sc.window();
        let step = ((params.step_fraction * ww as f64).round() as usize).max(1);
        let mut y = region.y;
        while y + wh <= region.bottom() {
            rows.push((ci, y, step));
            y += step;
        }
    }

    let mut raw: Vec<Detection> = rows
        .par_iter()
        .flat_map_iter(|&(ci, y, step)| {
            let sc = &cascades[ci];
            let (ww, wh) = sc.window();
            let mut found = Vec::new();
            let mut x = region.x;
            while x + ww <= region.right() {
                let norm = sc.norm_at(ii, x, y);
                let v = sc.evaluate(ii, x, y, norm);
                if v.accepted {
                    found.push(Detection {
                        rect: Rect::new(x, y, ww, wh),
                        score: v.margin,
                        scale: sc.scale(),
                        neighbors: 0,
                    });
                }
                x += step;
            }
            found
        })
        .collect();
    raw.sort_by(detection_order);
    let mut kept = non_max_suppression(raw, NMS_IOU);
    kept.retain(|d| d.neighbors >= params.min_neighbors);
    Ok(kept)
}

/// Best eye candidate in each half of a face, in image left/right order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EyePair {
    pub left: Option<Detection>,
    pub right: Option<Detection>,
}

impl EyePair {
    pub fn both(&self) -> Option<(Detection, Detection)> {
        Some((self.left?, self.right?))
    }
}

/// Fraction of the face box, from the top, searched for eyes.
pub const EYE_BAND: f64 = 0.6;

/// Searches the upper part of `face` for eyes and keeps the best-scoring
/// candidate on each side of the face's vertical midline.
pub fn detect_eyes_in_face(
    eye_model: &CascadeModel,
    ii: &IntegralImage,
    face: Rect,
    params: &DetectParams,
) -> Result<EyePair, CascadeError> {
    if !face.fits(ii.width(), ii.height()) {
        return Err(CascadeError::WindowOutOfBounds {
            window: face,
            width: ii.width(),
            height: ii.height(),
        });
    }
    let band = Rect::new(face.x, face.y, face.w, (face.h as f64 * EYE_BAND).round() as usize);
    let mid = face.x as f64 + face.w as f64 / 2.0;
    let mut params = *params;
    if params.max_size == 0 {
        params.max_size = face.w / 2;
    }
    let mut pair = EyePair::default();
    // Candidates arrive best-first, so the first one on each side wins.
    for d in detect_in_region(eye_model, ii, band, &params)? {
        let slot = if d.center().0 < mid {
            &mut pair.left
        } else {
            &mut pair.right
        };
        if slot.is_none() {
            *slot = Some(d);
        }
    }
    Ok(pair)
}
