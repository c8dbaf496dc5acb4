use super::{BoostError, Label, Polarity};

/// Best threshold/polarity for one feature's values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpFit {
    pub threshold: f64,
    pub polarity: Polarity,
    pub error: f64,
    /// Set when every sample has the same label; the fit is then a constant
    /// classifier.
    pub degenerate: bool,
}

/// Fits a decision stump minimizing weighted misclassification.
///
/// Weights must sum to 1. Runs in O(n log n) (sort, then one scan over the
/// gaps between distinct values).
pub fn train_stump(values: &[f64], labels: &[Label], weights: &[f64]) -> Result<StumpFit, BoostError> {
    if values.len() != labels.len() || values.len() != weights.len() {
        return Err(BoostError::LengthMismatch {
            values: values.len(),
            labels: labels.len(),
            weights: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(BoostError::WeightsNotNormalized(total));
    }
    if values.is_empty() {
        return Err(BoostError::SingleClass);
    }
    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    order.sort_by(|&a, &b| values[a as usize].total_cmp(&values[b as usize]));
    Ok(scan_sorted(values, &order, labels, weights))
}

/// Scan over a presorted permutation. Also handles the single-class case.
pub(crate) fn scan_sorted(values: &[f64], order: &[u32], labels: &[Label], weights: &[f64]) -> StumpFit {
    let n = order.len();
    let lo = values[order[0] as usize];
    let hi = values[order[n - 1] as usize];

    let mut pos_total = 0.0;
    let mut neg_total = 0.0;
    let (mut any_pos, mut any_neg) = (false, false);
    for (&l, &w) in labels.iter().zip(weights) {
        match l {
            Label::Positive => {
                pos_total += w;
                any_pos = true;
            }
            Label::Negative => {
                neg_total += w;
                any_neg = true;
            }
        }
    }
    if !(any_pos && any_neg) {
        // Constant classifier: everything below `hi + 1` is predicted positive.
        let threshold = if any_pos { hi + 1.0 } else { lo - 1.0 };
        return StumpFit {
            threshold,
            polarity: Polarity::Positive,
            error: 0.0,
            degenerate: true,
        };
    }

    let mut best = StumpFit {
        threshold: lo - 1.0,
        polarity: Polarity::Positive,
        error: f64::INFINITY,
        degenerate: false,
    };
    let mut pos_below = 0.0;
    let mut neg_below = 0.0;
    for k in 0..=n {
        let gap = if k == 0 {
            Some(lo - 1.0)
        } else if k == n {
            Some(hi + 1.0)
        } else {
            let a = values[order[k - 1] as usize];
            let b = values[order[k] as usize];
            (a < b).then(|| {
                let mid = a + (b - a) / 2.0;
                if mid > a {
                    mid
                } else {
                    b
                }
            })
        };
        if let Some(t) = gap {
            // Polarity +1 predicts positive below t; -1 predicts positive above.
            let err_pos = neg_below + (pos_total - pos_below);
            let err_neg = pos_below + (neg_total - neg_below);
            if err_pos < best.error {
                best.error = err_pos;
                best.threshold = t;
                best.polarity = Polarity::Positive;
            }
            if err_neg < best.error {
                best.error = err_neg;
                best.threshold = t;
                best.polarity = Polarity::Negative;
            }
        }
        if k < n {
            let i = order[k] as usize;
            match labels[i] {
                Label::Positive => pos_below += weights[i],
                Label::Negative => neg_below += weights[i],
            }
        }
    }
    best.error = best.error.clamp(0.0, 1.0);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::*;

    #[test]
    fn separable_values() {
        let fit = train_stump(
            &[1.0, 2.0, 8.0, 9.0],
            &[Negative, Negative, Positive, Positive],
            &[0.25; 4],
        )
        .unwrap();
        assert_eq!(fit.error, 0.0);
        assert!(fit.threshold > 2.0 && fit.threshold < 8.0);
        assert_eq!(fit.polarity, Polarity::Negative);
        assert!(!fit.degenerate);
    }

    #[test]
    fn single_class_is_degenerate() {
        let fit = train_stump(&[3.0, 1.0], &[Positive, Positive], &[0.5, 0.5]).unwrap();
        assert!(fit.degenerate);
        assert_eq!(fit.error, 0.0);
        assert!(fit.threshold > 3.0 && fit.polarity == Polarity::Positive);
        let fit = train_stump(&[3.0, 1.0], &[Negative, Negative], &[0.5, 0.5]).unwrap();
        assert!(fit.degenerate && fit.threshold < 1.0);
    }

    #[test]
    fn rejects_unnormalized_weights() {
        assert!(matches!(
            train_stump(&[1.0, 2.0], &[Positive, Negative], &[0.5, 0.6]),
            Err(BoostError::WeightsNotNormalized(_))
        ));
        assert!(matches!(
            train_stump(&[1.0], &[Positive, Negative], &[0.5, 0.5]),
            Err(BoostError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ties_are_not_split() {
        // Equal values with different labels cannot be separated.
        let fit = train_stump(
            &[5.0, 5.0, 5.0, 5.0],
            &[Positive, Negative, Positive, Negative],
            &[0.25; 4],
        )
        .unwrap();
        assert!((fit.error - 0.5).abs() < 1e-12);
    }
}
