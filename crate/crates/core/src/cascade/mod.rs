//! Attentional cascades: evaluation, training, detection and model files.
//!
//! A window is accepted only if every stage's vote total reaches the stage
//! threshold; evaluation stops at the first stage that falls short, so most
//! background windows cost a handful of feature lookups.

mod detect;
mod legacy;
mod native;
mod train;

pub use detect::{
    detect_eyes_in_face, detect_in_region, detect_multiscale, non_max_suppression, DetectParams,
    Detection, EyePair, NMS_IOU,
};
pub use legacy::{parse_legacy_cascade_xml, LegacyXmlError};
pub use native::{load_model, save_model, ModelFormatError, FORMAT_VERSION, MAGIC};
pub use train::{train_cascade, train_cascade_with, CascadeTrainConfig, StageReport, TrainOutcome, TrainStatus};

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::haarboost::{window_norm, BoostError, Polarity, StrongClassifier};
use crate::imaging::{IntegralImage, Rect};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error(transparent)]
    Boost(#[from] BoostError),
    #[error("window {window:?} does not fit a {width}x{height} image")]
    WindowOutOfBounds {
        window: Rect,
        width: usize,
        height: usize,
    },
    #[error("invalid parameter: {0}")]
    BadParams(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("training set is empty: {0}")]
    EmptyTrainingSet(&'static str),
    #[error("positive patch {index} is {found:?}, expected {expected:?}")]
    PatchSize {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error(
        "stage {stage} stalled after {rounds} rounds: detection {detection_rate:.4}, \
         false positives {false_positive_rate:.4} (targets d >= {min_detection}, f <= {max_false_positive})"
    )]
    StageFailed {
        stage: usize,
        rounds: usize,
        detection_rate: f64,
        false_positive_rate: f64,
        min_detection: f64,
        max_false_positive: f64,
    },
}

/// One cascade stage. `threshold` overrides the classifier's default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeStage {
    pub classifier: StrongClassifier,
    pub threshold: f64,
}

impl CascadeStage {
    pub fn new(classifier: StrongClassifier, threshold: f64) -> Self {
        CascadeStage {
            classifier,
            threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeModel {
    pub base_width: usize,
    pub base_height: usize,
    pub stages: Vec<CascadeStage>,
}

impl CascadeModel {
    /// Builds and validates a model.
    pub fn new(base_width: usize, base_height: usize, stages: Vec<CascadeStage>) -> Result<Self, CascadeError> {
        let m = CascadeModel {
            base_width,
            base_height,
            stages,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn base_area(&self) -> usize {
        self.base_width * self.base_height
    }

    pub fn weak_count(&self) -> usize {
        self.stages.iter().map(|s| s.classifier.weaks.len()).sum()
    }

    pub fn validate(&self) -> Result<(), CascadeError> {
        let bad = |msg: String| Err(CascadeError::InvalidModel(msg));
        if self.base_width == 0 || self.base_height == 0 {
            return bad(format!(
                "base window {}x{} is empty",
                self.base_width, self.base_height
            ));
        }
        for (si, stage) in self.stages.iter().enumerate() {
            if !stage.threshold.is_finite() {
                return bad(format!("stage {si} threshold is not finite"));
            }
            for (wi, w) in stage.classifier.weaks.iter().enumerate() {
                if !(w.alpha.is_finite() && w.alpha >= 0.0) {
                    return bad(format!("stage {si} weak {wi}: alpha {} is not a finite nonnegative number", w.alpha));
                }
                if !w.weak.threshold.is_finite() {
                    return bad(format!("stage {si} weak {wi}: threshold is not finite"));
                }
                if !w.weak.feature.fits(self.base_width, self.base_height) {
                    return bad(format!(
                        "stage {si} weak {wi}: feature {:?} does not fit the {}x{} base window",
                        w.weak.feature, self.base_width, self.base_height
                    ));
                }
            }
            let total = stage.classifier.alpha_sum();
            if stage.threshold > total + 1e-9 * total.abs().max(1.0) {
                return bad(format!(
                    "stage {si} threshold {} exceeds its total alpha {total}",
                    stage.threshold
                ));
            }
        }
        Ok(())
    }

    /// Window size at `scale`.
    pub fn window_at(&self, scale: f64) -> (usize, usize) {
        (
            (self.base_width as f64 * scale).round() as usize,
            (self.base_height as f64 * scale).round() as usize,
        )
    }
}

/// Result of running the cascade on one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowVerdict {
    pub accepted: bool,
    pub stages_passed: usize,
    /// Last evaluated stage's vote total minus its threshold (0 for an empty
    /// cascade).
    pub margin: f64,
}

#[derive(Debug, Clone)]
struct CompiledWeak {
    rects: ArrayVec<(Rect, f64), 4>,
    threshold: f64,
    polarity: Polarity,
    alpha: f64,
}

#[derive(Debug, Clone)]
struct CompiledStage {
    weaks: Vec<CompiledWeak>,
    threshold: f64,
}

/// A cascade with every feature pre-scaled for one window size.
#[derive(Debug, Clone)]
pub struct ScaledCascade {
    scale: f64,
    window: (usize, usize),
    base_area: usize,
    stages: Vec<CompiledStage>,
}

impl ScaledCascade {
    pub fn new(model: &CascadeModel, scale: f64) -> Result<Self, CascadeError> {
        let mut stages = Vec::with_capacity(model.stages.len());
        for stage in &model.stages {
            let mut weaks = Vec::with_capacity(stage.classifier.weaks.len());
            for w in &stage.classifier.weaks {
                let sf = w.weak.feature.scaled(scale)?;
                weaks.push(CompiledWeak {
                    rects: sf.rects,
                    threshold: w.weak.threshold,
                    polarity: w.weak.polarity,
                    alpha: w.alpha,
                });
            }
            stages.push(CompiledStage {
                weaks,
                threshold: stage.threshold,
            });
        }
        Ok(ScaledCascade {
            scale,
            window: model.window_at(scale),
            base_area: model.base_area(),
            stages,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn window(&self) -> (usize, usize) {
        self.window
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    /// Normalization divisor for the window at (x, y).
    pub fn norm_at(&self, ii: &IntegralImage, x: usize, y: usize) -> f64 {
        window_norm(ii, Rect::new(x, y, self.window.0, self.window.1), self.base_area)
    }

    /// Runs the stages in order on the window at (x, y), which must fit.
    ///
    /// `on_stage(index, total, passed)` is called once per evaluated stage.
    #[inline]
    pub fn evaluate_traced(
        &self,
        ii: &IntegralImage,
        x: usize,
        y: usize,
        norm: f64,
        mut on_stage: impl FnMut(usize, f64, bool),
    ) -> WindowVerdict {
        let inv = 1.0 / norm;
        let mut margin = 0.0;
        for (si, stage) in self.stages.iter().enumerate() {
            let mut total = 0.0;
            for w in &stage.weaks {
                let mut raw = 0.0;
                for (r, wt) in &w.rects {
                    raw += wt * ii.sum_unchecked(x + r.x, y + r.y, r.w, r.h) as f64;
                }
                let v = raw * inv;
                let hit = match w.polarity {
                    Polarity::Positive => v < w.threshold,
                    Polarity::Negative => v > w.threshold,
                };
                if hit {
                    total += w.alpha;
                }
            }
            margin = total - stage.threshold;
            let passed = total >= stage.threshold;
            on_stage(si, total, passed);
            if !passed {
                return WindowVerdict {
                    accepted: false,
                    stages_passed: si,
                    margin,
                };
            }
        }
        WindowVerdict {
            accepted: true,
            stages_passed: self.stages.len(),
            margin,
        }
    }

    #[inline]
    pub fn evaluate(&self, ii: &IntegralImage, x: usize, y: usize, norm: f64) -> WindowVerdict {
        self.evaluate_traced(ii, x, y, norm, |_, _, _| {})
    }
}

/// Classifies the window at `origin` with the cascade scaled by `scale`.
///
/// `norm` divides every raw feature sum; pass
/// [`window_norm`](crate::haarboost::window_norm) for the usual
/// variance normalization.
pub fn classify_window(
    model: &CascadeModel,
    ii: &IntegralImage,
    origin: (usize, usize),
    scale: f64,
    norm: f64,
) -> Result<WindowVerdict, CascadeError> {
    let sc = ScaledCascade::new(model, scale)?;
    let (w, h) = sc.window();
    let window = Rect::new(origin.0, origin.1, w, h);
    if !window.fits(ii.width(), ii.height()) {
        return Err(CascadeError::WindowOutOfBounds {
            window,
            width: ii.width(),
            height: ii.height(),
        });
    }
    Ok(sc.evaluate(ii, origin.0, origin.1, norm))
}
