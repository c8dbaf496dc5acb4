//! Haar-like features, decision stumps and discrete AdaBoost.

mod adaboost;
mod feature;
mod stump;

pub use adaboost::{adaboost_train, Booster, FeatureMatrix, RoundReport};
pub use feature::{enumerate_features, FeatureKind, HaarFeature, ScaledFeature};
pub use stump::{train_stump, StumpFit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{GrayImage, IntegralImage, Rect};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoostError {
    #[error("feature {0:?} violates its kind's layout constraints")]
    BadFeatureShape(HaarFeature),
    #[error("scale {0} collapses a feature rectangle or is not positive")]
    BadScale(f64),
    #[error("feature {feature:?} at origin {origin:?}, scale {scale} leaves the image")]
    FeatureOutOfBounds {
        feature: HaarFeature,
        origin: (usize, usize),
        scale: f64,
    },
    #[error("sample weights sum to {0}, expected 1")]
    WeightsNotNormalized(f64),
    #[error("{values} values, {labels} labels and {weights} weights do not line up")]
    LengthMismatch {
        values: usize,
        labels: usize,
        weights: usize,
    },
    #[error("training needs at least one positive and one negative sample")]
    SingleClass,
    #[error("no features to choose from")]
    NoFeatures,
    #[error("at least one boosting round is required")]
    ZeroRounds,
    #[error("sample {index} is {found:?}, base window is {expected:?}")]
    SampleSize {
        index: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("round {round}: best stump has weighted error {error:.6} (no better than chance)")]
    NoWeakLearner { round: usize, error: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// Divisor applied to raw feature sums inside a detection window: the
/// window's standard deviation (floored at 1) times its area relative to the
/// base window.
#[inline]
pub fn window_norm(ii: &IntegralImage, window: Rect, base_area: usize) -> f64 {
    let sd = ii.stats_unchecked(window).std_dev().max(1.0);
    sd * window.area() as f64 / base_area as f64
}

/// A base-window patch with its label and precomputed normalization.
#[derive(Debug, Clone)]
pub struct LabeledSample {
    pub integral: IntegralImage,
    pub label: Label,
    pub norm: f64,
}

impl LabeledSample {
    pub fn new(patch: &GrayImage, label: Label) -> Self {
        let integral = IntegralImage::new(patch);
        let area = patch.width() * patch.height();
        let norm = window_norm(&integral, patch.bounds(), area);
        LabeledSample {
            integral,
            label,
            norm,
        }
    }

    pub fn size(&self) -> (usize, usize) {
        (self.integral.width(), self.integral.height())
    }

    /// Normalized value of `f` on this patch.
    pub fn feature_value(&self, f: &HaarFeature) -> f64 {
        f.eval_raw(&self.integral, 0, 0) as f64 / self.norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            _ => None,
        }
    }

    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// Decision stump over one feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakClassifier {
    pub feature: HaarFeature,
    pub threshold: f64,
    pub polarity: Polarity,
}

impl WeakClassifier {
    /// True iff `polarity * value < polarity * threshold`.
    #[inline]
    pub fn predict(&self, value: f64) -> bool {
        match self.polarity {
            Polarity::Positive => value < self.threshold,
            Polarity::Negative => value > self.threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedWeak {
    pub alpha: f64,
    pub weak: WeakClassifier,
}

/// Weighted vote of weak classifiers: positive iff `sum(alpha * h) >= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongClassifier {
    pub weaks: Vec<WeightedWeak>,
    pub threshold: f64,
}

impl Default for StrongClassifier {
    fn default() -> Self {
        StrongClassifier {
            weaks: Vec::new(),
            threshold: 0.0,
        }
    }
}

impl StrongClassifier {
    /// Builds a classifier with the default threshold of half the total alpha.
    pub fn new(weaks: Vec<WeightedWeak>) -> Self {
        let mut sc = StrongClassifier {
            weaks,
            threshold: 0.0,
        };
        sc.threshold = sc.default_threshold();
        sc
    }

    pub fn alpha_sum(&self) -> f64 {
        self.weaks.iter().map(|w| w.alpha).sum()
    }

    pub fn default_threshold(&self) -> f64 {
        0.5 * self.alpha_sum()
    }

    pub fn push(&mut self, alpha: f64, weak: WeakClassifier) {
        self.weaks.push(WeightedWeak { alpha, weak });
        self.threshold = self.default_threshold();
    }

    /// Vote total with `value(feature)` supplying normalized feature values.
    pub fn score_with(&self, mut value: impl FnMut(&HaarFeature) -> f64) -> f64 {
        self.weaks
            .iter()
            .filter(|w| w.weak.predict(value(&w.weak.feature)))
            .map(|w| w.alpha)
            .sum()
    }

    pub fn score(&self, sample: &LabeledSample) -> f64 {
        self.score_with(|f| sample.feature_value(f))
    }

    pub fn predict(&self, sample: &LabeledSample) -> bool {
        self.score(sample) >= self.threshold
    }
}
