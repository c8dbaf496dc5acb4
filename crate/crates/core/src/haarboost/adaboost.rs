use rayon::prelude::*;

use super::stump::scan_sorted;
use super::{BoostError, HaarFeature, Label, LabeledSample, StrongClassifier, StumpFit, WeakClassifier};

/// Errors at or below this count as a perfect stump.
const PERFECT_EPS: f64 = 1e-12;

/// Feature values laid out feature-major.
///
/// When `features x samples` fits the cache budget the values and their
/// sorted orders are computed once; otherwise each round recomputes them per
/// feature, which bounds memory at one feature's worth per worker.
pub enum FeatureMatrix {
    Cached { values: Vec<f64>, order: Vec<u32> },
    Streaming,
}

impl FeatureMatrix {
    /// Default budget in `features x samples` cells (about 200 MB).
    pub const DEFAULT_CACHE_CELLS: usize = 16_000_000;

    pub fn build(features: &[HaarFeature], samples: &[LabeledSample], cache_cells: usize) -> Self {
        let n = samples.len();
        if features.len().saturating_mul(n) > cache_cells {
            return FeatureMatrix::Streaming;
        }
        let mut values = vec![0.0; features.len() * n];
        let mut order = vec![0u32; features.len() * n];
        values
            .par_chunks_mut(n)
            .zip(order.par_chunks_mut(n))
            .zip(features.par_iter())
            .for_each(|((vals, ord), f)| {
                for (v, s) in vals.iter_mut().zip(samples) {
                    *v = s.feature_value(f);
                }
                for (i, o) in ord.iter_mut().enumerate() {
                    *o = i as u32;
                }
                ord.sort_by(|&a, &b| vals[a as usize].total_cmp(&vals[b as usize]));
            });
        FeatureMatrix::Cached { values, order }
    }
}

/// Outcome of one boosting round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundReport {
    pub feature_index: usize,
    pub error: f64,
    pub alpha: f64,
    /// The chosen stump classified the weighted set perfectly; boosting stops.
    pub perfect: bool,
}

/// Discrete AdaBoost over decision stumps, one round at a time.
pub struct Booster<'a> {
    samples: &'a [LabeledSample],
    features: &'a [HaarFeature],
    labels: Vec<Label>,
    weights: Vec<f64>,
    matrix: FeatureMatrix,
    classifier: StrongClassifier,
    history: Vec<RoundReport>,
    finished: bool,
}

impl<'a> Booster<'a> {
    pub fn new(samples: &'a [LabeledSample], features: &'a [HaarFeature]) -> Result<Self, BoostError> {
        Self::with_cache_cells(samples, features, FeatureMatrix::DEFAULT_CACHE_CELLS)
    }

    pub fn with_cache_cells(
        samples: &'a [LabeledSample],
        features: &'a [HaarFeature],
        cache_cells: usize,
    ) -> Result<Self, BoostError> {
        if features.is_empty() {
            return Err(BoostError::NoFeatures);
        }
        let positives = samples.iter().filter(|s| s.label == Label::Positive).count();
        let negatives = samples.len() - positives;
        if positives == 0 || negatives == 0 {
            return Err(BoostError::SingleClass);
        }
        let expected = samples[0].size();
        if let Some((index, s)) = samples.iter().enumerate().find(|(_, s)| s.size() != expected) {
            return Err(BoostError::SampleSize {
                index,
                expected,
                found: s.size(),
            });
        }
        let labels: Vec<Label> = samples.iter().map(|s| s.label).collect();
        // Each class starts with half of the total weight.
        let weights = labels
            .iter()
            .map(|l| match l {
                Label::Positive => 0.5 / positives as f64,
                Label::Negative => 0.5 / negatives as f64,
            })
            .collect();
        Ok(Booster {
            samples,
            features,
            labels,
            weights,
            matrix: FeatureMatrix::build(features, samples, cache_cells),
            classifier: StrongClassifier::default(),
            history: Vec::new(),
            finished: false,
        })
    }

    pub fn classifier(&self) -> &StrongClassifier {
        &self.classifier
    }

    pub fn into_classifier(self) -> StrongClassifier {
        self.classifier
    }

    pub fn history(&self) -> &[RoundReport] {
        &self.history
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True once a perfect stump has been selected.
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn normalize(&mut self) {
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
    }

    /// Exhaustive search for the lowest-error stump. Ties go to the lowest
    /// feature index regardless of evaluation order.
    fn best_stump(&self) -> (usize, StumpFit) {
        let n = self.samples.len();
        let better = |a: (usize, StumpFit), b: (usize, StumpFit)| {
            if b.1.error < a.1.error || (b.1.error == a.1.error && b.0 < a.0) {
                b
            } else {
                a
            }
        };
        match &self.matrix {
            FeatureMatrix::Cached { values, order } => (0..self.features.len())
                .into_par_iter()
                .with_min_len(64)
                .map(|fi| {
                    let span = fi * n..(fi + 1) * n;
                    let fit = scan_sorted(
                        &values[span.clone()],
                        &order[span],
                        &self.labels,
                        &self.weights,
                    );
                    (fi, fit)
                })
                .reduce_with(better),
            FeatureMatrix::Streaming => (0..self.features.len())
                .into_par_iter()
                .with_min_len(64)
                .map_init(
                    || (vec![0.0; n], Vec::with_capacity(n)),
                    |(vals, ord), fi| {
                        let f = &self.features[fi];
                        for (v, s) in vals.iter_mut().zip(self.samples) {
                            *v = s.feature_value(f);
                        }
                        ord.clear();
                        ord.extend(0..n as u32);
                        ord.sort_by(|&a: &u32, &b: &u32| vals[a as usize].total_cmp(&vals[b as usize]));
                        (fi, scan_sorted(vals, ord, &self.labels, &self.weights))
                    },
                )
                .reduce_with(better),
        }
        .expect("feature list is nonempty")
    }

    /// Runs one round. Returns `None` when boosting already finished.
    pub fn step(&mut self) -> Result<Option<RoundReport>, BoostError> {
        if self.finished {
            return Ok(None);
        }
        self.normalize();
        let round = self.history.len() + 1;
        let (fi, fit) = self.best_stump();
        let error = fit.error;
        if error >= 0.5 - PERFECT_EPS {
            return Err(BoostError::NoWeakLearner { round, error });
        }
        let weak = WeakClassifier {
            feature: self.features[fi],
            threshold: fit.threshold,
            polarity: fit.polarity,
        };
        let perfect = error <= PERFECT_EPS;
        let alpha = if perfect {
            // A perfect stump would get infinite weight; cap it.
            ((1.0 - PERFECT_EPS) / PERFECT_EPS).ln()
        } else {
            let beta = error / (1.0 - error);
            for (i, s) in self.samples.iter().enumerate() {
                let predicted = if weak.predict(s.feature_value(&weak.feature)) {
                    Label::Positive
                } else {
                    Label::Negative
                };
                if predicted == self.labels[i] {
                    self.weights[i] *= beta;
                }
            }
            (1.0 / beta).ln()
        };
        self.classifier.push(alpha, weak);
        let report = RoundReport {
            feature_index: fi,
            error,
            alpha,
            perfect,
        };
        self.history.push(report);
        self.finished = perfect;
        Ok(Some(report))
    }
}

/// Trains a strong classifier with up to `rounds` rounds of AdaBoost.
///
/// Stops early when a round finds a perfect stump.
pub fn adaboost_train(
    samples: &[LabeledSample],
    features: &[HaarFeature],
    rounds: usize,
) -> Result<StrongClassifier, BoostError> {
    if rounds == 0 {
        return Err(BoostError::ZeroRounds);
    }
    let mut booster = Booster::new(samples, features)?;
    for _ in 0..rounds {
        if booster.step()?.is_none() {
            break;
        }
    }
    Ok(booster.into_classifier())
}
