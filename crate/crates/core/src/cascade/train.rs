use rayon::prelude::*;
use serde::Serialize;

use super::{CascadeError, CascadeModel, CascadeStage, ScaledCascade};
use crate::haarboost::{enumerate_features, Booster, FeatureMatrix, HaarFeature, Label, LabeledSample};
use crate::imaging::{GrayImage, IntegralImage, Rect};

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrainConfig {
    /// Minimum per-stage detection rate `d` on the positives.
    pub min_detection: f64,
    /// Maximum per-stage false-positive rate `f` on the stage's negatives.
    pub max_false_positive: f64,
    /// Overall false-positive target `F`.
    pub target_false_positive: f64,
    pub max_stages: usize,
    pub max_rounds_per_stage: usize,
    /// Negative windows harvested for each stage.
    pub negatives_per_stage: usize,
    /// Fewer harvested false positives than this (but more than zero) ends
    /// training with [`TrainStatus::NegativesExhausted`].
    pub min_negatives: usize,
    /// Stride between candidate windows in the negative pool; 0 picks half
    /// the shorter base side.
    pub negative_stride: usize,
    /// Feature pool; `None` enumerates every feature of the base window.
    pub features: Option<Vec<HaarFeature>>,
    pub cache_cells: usize,
}

impl Default for CascadeTrainConfig {
    fn default() -> Self {
        CascadeTrainConfig {
            min_detection: 0.995,
            max_false_positive: 0.5,
            target_false_positive: 1e-5,
            max_stages: 30,
            max_rounds_per_stage: 200,
            negatives_per_stage: 1000,
            min_negatives: 10,
            negative_stride: 0,
            features: None,
            cache_cells: FeatureMatrix::DEFAULT_CACHE_CELLS,
        }
    }
}

impl CascadeTrainConfig {
    pub fn validate(&self) -> Result<(), CascadeError> {
        let bad = |m: String| Err(CascadeError::BadParams(m));
        if !(self.min_detection > 0.5 && self.min_detection <= 1.0) {
            return bad(format!("min detection rate must be in (0.5, 1], got {}", self.min_detection));
        }
        if !(self.max_false_positive > 0.0 && self.max_false_positive < 1.0) {
            return bad(format!(
                "max false-positive rate must be in (0, 1), got {}",
                self.max_false_positive
            ));
        }
        if !(self.target_false_positive > 0.0 && self.target_false_positive < 1.0) {
            return bad(format!(
                "target false-positive rate must be in (0, 1), got {}",
                self.target_false_positive
            ));
        }
        if self.max_rounds_per_stage == 0 || self.max_stages == 0 || self.negatives_per_stage == 0 {
            return bad("stage, round and negative limits must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrainStatus {
    /// The false-positive target was met, or the pool has no false positives left.
    Converged,
    /// Too few false positives remained in the pool to train another stage.
    NegativesExhausted,
    /// `max_stages` reached before the target.
    StageLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: usize,
    pub rounds: usize,
    pub threshold: f64,
    pub detection_rate: f64,
    pub false_positive_rate: f64,
    pub negatives: usize,
    /// Share of pool windows the cascade accepted before this stage was added.
    pub pool_acceptance: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CascadeModel,
    pub status: TrainStatus,
    pub stages: Vec<StageReport>,
    /// Product of the per-stage false-positive rates.
    pub cumulative_false_positive: f64,
}

struct Harvest {
    samples: Vec<LabeledSample>,
    accepted: usize,
    scanned: usize,
}

/// Collects, in a fixed image/row/column order, pool windows the current
/// cascade accepts.
fn harvest(
    model: &CascadeModel,
    pool: &[(GrayImage, IntegralImage)],
    stride: usize,
    limit: usize,
) -> Result<Harvest, CascadeError> {
    let sc = ScaledCascade::new(model, 1.0)?;
    let (bw, bh) = (model.base_width, model.base_height);
    let per_image: Vec<(Vec<Rect>, usize)> = pool
        .par_iter()
        .map(|(img, ii)| {
            let mut hits = Vec::new();
            let mut scanned = 0;
            let mut y = 0;
            while y + bh <= img.height() {
                let mut x = 0;
                while x + bw <= img.width() {
                    scanned += 1;
                    if sc.evaluate(ii, x, y, sc.norm_at(ii, x, y)).accepted {
                        hits.push(Rect::new(x, y, bw, bh));
                    }
                    x += stride;
                }
                y += stride;
            }
            (hits, scanned)
        })
        .collect();
    let mut samples = Vec::new();
    let (mut accepted, mut scanned) = (0, 0);
    for ((img, _), (hits, n)) in pool.iter().zip(per_image) {
        scanned += n;
        accepted += hits.len();
        for r in hits {
            if samples.len() < limit {
                let patch = img.crop(r).expect("window lies inside the image");
                samples.push(LabeledSample::new(&patch, Label::Negative));
            }
        }
    }
    Ok(Harvest {
        samples,
        accepted,
        scanned,
    })
}

/// Largest threshold keeping at least `ceil(d * n)` of `scores` at or above it.
fn detection_threshold(scores: &[f64], d: f64) -> f64 {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let keep = ((d * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[sorted.len() - keep.min(sorted.len())]
}

fn rate(scores: &[f64], threshold: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().filter(|&&s| s >= threshold).count() as f64 / scores.len() as f64
}

/// Trains a cascade; see [`train_cascade_with`].
pub fn train_cascade(
    positives: &[GrayImage],
    negative_pool: &[GrayImage],
    cfg: &CascadeTrainConfig,
) -> Result<TrainOutcome, CascadeError> {
    train_cascade_with(positives, negative_pool, cfg, |_| {})
}

/// Trains a cascade from base-window positive patches and a pool of
/// negative images, calling `on_stage` after each completed stage.
///
/// Each stage boosts one round at a time, lowering its threshold so the
/// positives keep a detection rate of at least `d`, until its false-positive
/// rate on the current negatives is at most `f`. Negatives for the next stage
/// are the pool windows the cascade so far still accepts.
pub fn train_cascade_with(
    positives: &[GrayImage],
    negative_pool: &[GrayImage],
    cfg: &CascadeTrainConfig,
    mut on_stage: impl FnMut(&StageReport),
) -> Result<TrainOutcome, CascadeError> {
    cfg.validate()?;
    let first = positives.first().ok_or(CascadeError::EmptyTrainingSet("positives"))?;
    if negative_pool.is_empty() {
        return Err(CascadeError::EmptyTrainingSet("negative pool"));
    }
    let (bw, bh) = (first.width(), first.height());
    if let Some((index, p)) = positives
        .iter()
        .enumerate()
        .find(|(_, p)| (p.width(), p.height()) != (bw, bh))
    {
        return Err(CascadeError::PatchSize {
            index,
            expected: (bw, bh),
            found: (p.width(), p.height()),
        });
    }
    let features = match &cfg.features {
        Some(f) => f.clone(),
        None => enumerate_features(bw, bh),
    };
    let stride = if cfg.negative_stride == 0 {
        (bw.min(bh) / 2).max(1)
    } else {
        cfg.negative_stride
    };
    let pool: Vec<(GrayImage, IntegralImage)> = negative_pool
        .iter()
        .map(|img| (img.clone(), IntegralImage::new(img)))
        .collect();
    let pos_samples: Vec<LabeledSample> = positives
        .iter()
        .map(|p| LabeledSample::new(p, Label::Positive))
        .collect();

    let mut model = CascadeModel::new(bw, bh, Vec::new())?;
    let mut reports = Vec::new();
    let mut cumulative = 1.0;
    let mut status = TrainStatus::StageLimit;

    for stage_idx in 0..cfg.max_stages {
        let h = harvest(&model, &pool, stride, cfg.negatives_per_stage)?;
        if h.accepted == 0 {
            status = TrainStatus::Converged;
            break;
        }
        if h.samples.len() < cfg.min_negatives {
            log::warn!(
                "negative pool exhausted: only {} false positives left before stage {}",
                h.samples.len(),
                stage_idx
            );
            status = TrainStatus::NegativesExhausted;
            break;
        }
        let pool_acceptance = h.accepted as f64 / h.scanned as f64;
        let n_neg = h.samples.len();
        let mut samples = pos_samples.clone();
        samples.extend(h.samples);
        let n_pos = pos_samples.len();

        let mut booster = Booster::with_cache_cells(&samples, &features, cfg.cache_cells)?;
        let mut scores = vec![0.0; samples.len()];
        let mut rounds = 0;
        let (threshold, detection_rate, false_positive_rate) = loop {
            let Some(round) = booster.step()? else {
                unreachable!("a finished booster is never stepped again");
            };
            rounds += 1;
            let newest = booster.classifier().weaks.last().expect("one weak per round");
            for (score, s) in scores.iter_mut().zip(&samples) {
                if newest.weak.predict(s.feature_value(&newest.weak.feature)) {
                    *score += newest.alpha;
                }
            }
            let default = booster.classifier().default_threshold();
            let threshold = detection_threshold(&scores[..n_pos], cfg.min_detection).min(default);
            let det = rate(&scores[..n_pos], threshold);
            let fp = rate(&scores[n_pos..], threshold);
            log::debug!("stage {stage_idx} round {rounds}: d={det:.4} f={fp:.4}");
            if fp <= cfg.max_false_positive {
                break (threshold, det, fp);
            }
            if rounds >= cfg.max_rounds_per_stage || round.perfect {
                return Err(CascadeError::StageFailed {
                    stage: stage_idx,
                    rounds,
                    detection_rate: det,
                    false_positive_rate: fp,
                    min_detection: cfg.min_detection,
                    max_false_positive: cfg.max_false_positive,
                });
            }
        };

        model
            .stages
            .push(CascadeStage::new(booster.into_classifier(), threshold));
        cumulative *= false_positive_rate;
        debug_assert!(cumulative <= cfg.max_false_positive.powi(model.stages.len() as i32) + 1e-12);
        let report = StageReport {
            stage: stage_idx,
            rounds,
            threshold,
            detection_rate,
            false_positive_rate,
            negatives: n_neg,
            pool_acceptance,
        };
        on_stage(&report);
        reports.push(report);
        if cumulative <= cfg.target_false_positive {
            status = TrainStatus::Converged;
            break;
        }
    }
    model.validate()?;
    Ok(TrainOutcome {
        model,
        status,
        stages: reports,
        cumulative_false_positive: cumulative,
    })
}
