use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use super::BoostError;
use crate::imaging::{IntegralImage, Rect};

/// The five rectangle layouts of the classic Haar feature set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum FeatureKind {
    /// Left half `+1`, right half `-1`.
    TwoHorizontal = 0,
    /// Top half `+1`, bottom half `-1`.
    TwoVertical = 1,
    /// Left, middle, right thirds weighted `+1, -2, +1`.
    ThreeHorizontal = 2,
    /// Top, middle, bottom thirds weighted `+1, -2, +1`.
    ThreeVertical = 3,
    /// 2x2 checkerboard: top-left and bottom-right `+1`, the others `-1`.
    Checkerboard = 4,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 5] = [
        FeatureKind::TwoHorizontal,
        FeatureKind::TwoVertical,
        FeatureKind::ThreeHorizontal,
        FeatureKind::ThreeVertical,
        FeatureKind::Checkerboard,
    ];

    /// Horizontal and vertical cell counts: width and height must be
    /// multiples of these.
    pub fn cells(self) -> (usize, usize) {
        match self {
            FeatureKind::TwoHorizontal => (2, 1),
            FeatureKind::TwoVertical => (1, 2),
            FeatureKind::ThreeHorizontal => (3, 1),
            FeatureKind::ThreeVertical => (1, 3),
            FeatureKind::Checkerboard => (2, 2),
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::TwoHorizontal => "two-rect-horizontal",
            FeatureKind::TwoVertical => "two-rect-vertical",
            FeatureKind::ThreeHorizontal => "three-rect-horizontal",
            FeatureKind::ThreeVertical => "three-rect-vertical",
            FeatureKind::Checkerboard => "four-rect-checkerboard",
        }
    }

    /// Per-cell weights in row-major cell order.
    fn cell_weights(self) -> &'static [i32] {
        match self {
            FeatureKind::TwoHorizontal | FeatureKind::TwoVertical => &[1, -1],
            FeatureKind::ThreeHorizontal | FeatureKind::ThreeVertical => &[1, -2, 1],
            FeatureKind::Checkerboard => &[1, -1, -1, 1],
        }
    }
}

/// A Haar-like feature placed in base-window coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HaarFeature {
    pub kind: FeatureKind,
    pub x: u16,
    pub y: u16,
    pub w: u16,
    pub h: u16,
}

/// Weighted rectangles of a feature at one scale, relative to the window
/// origin. Weights are real because scaling re-balances them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledFeature {
    pub rects: ArrayVec<(Rect, f64), 4>,
}

impl ScaledFeature {
    #[inline]
    pub fn eval_at(&self, ii: &IntegralImage, ox: usize, oy: usize) -> f64 {
        let mut acc = 0.0;
        for (r, wt) in &self.rects {
            acc += wt * ii.sum_unchecked(ox + r.x, oy + r.y, r.w, r.h) as f64;
        }
        acc
    }

    /// Extent of the union of the rects.
    pub fn extent(&self) -> (usize, usize) {
        self.rects
            .iter()
            .fold((0, 0), |(w, h), (r, _)| (w.max(r.right()), h.max(r.bottom())))
    }
}

impl HaarFeature {
    /// Validates the layout constraints of `kind`.
    pub fn new(kind: FeatureKind, x: u16, y: u16, w: u16, h: u16) -> Result<Self, BoostError> {
        let f = HaarFeature { kind, x, y, w, h };
        let (cx, cy) = kind.cells();
        if w == 0 || h == 0 || !(w as usize).is_multiple_of(cx) || !(h as usize).is_multiple_of(cy) {
            return Err(BoostError::BadFeatureShape(f));
        }
        Ok(f)
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.x as usize,
            self.y as usize,
            self.w as usize,
            self.h as usize,
        )
    }

    pub fn fits(&self, base_w: usize, base_h: usize) -> bool {
        let (cx, cy) = self.kind.cells();
        self.w > 0
            && self.h > 0
            && (self.w as usize).is_multiple_of(cx)
            && (self.h as usize).is_multiple_of(cy)
            && self.bounds().fits(base_w, base_h)
    }

    /// Cell boundaries along one axis, in base-window coordinates.
    fn cuts(start: usize, len: usize, cells: usize) -> ArrayVec<usize, 4> {
        (0..=cells).map(|i| start + len * i / cells).collect()
    }

    /// The feature's rectangles with their integer weights, in cell order.
    pub fn weighted_rects(&self) -> ArrayVec<(Rect, i32), 4> {
        self.layout(1.0)
            .into_iter()
            .zip(self.kind.cell_weights())
            .map(|(r, &w)| (r, w))
            .collect()
    }

    fn layout(&self, scale: f64) -> ArrayVec<Rect, 4> {
        let (cx, cy) = self.kind.cells();
        let b = self.bounds();
        let sx = Self::cuts(b.x, b.w, cx);
        let sy = Self::cuts(b.y, b.h, cy);
        let round = |v: usize| (v as f64 * scale).round() as usize;
        let mut out = ArrayVec::new();
        for j in 0..cy {
            for i in 0..cx {
                let (x0, x1) = (round(sx[i]), round(sx[i + 1]));
                let (y0, y1) = (round(sy[j]), round(sy[j + 1]));
                out.push(Rect::new(x0, y0, x1 - x0, y1 - y0));
            }
        }
        out
    }

    /// Scales the feature by `scale` about the window origin.
    ///
    /// Cell boundaries are rounded to the nearest pixel, then the first
    /// rect's weight is re-balanced so that the weighted areas still sum to
    /// zero. At integer scales the weights are unchanged.
    pub fn scaled(&self, scale: f64) -> Result<ScaledFeature, BoostError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(BoostError::BadScale(scale));
        }
        let rects = self.layout(scale);
        if rects.iter().any(|r| r.area() == 0) {
            return Err(BoostError::BadScale(scale));
        }
        let weights = self.kind.cell_weights();
        let mut out: ArrayVec<(Rect, f64), 4> = rects
            .iter()
            .zip(weights)
            .map(|(r, &w)| (*r, w as f64))
            .collect();
        let rest: f64 = out[1..].iter().map(|(r, w)| w * r.area() as f64).sum();
        out[0].1 = -rest / out[0].0.area() as f64;
        Ok(ScaledFeature { rects: out })
    }

    /// Feature value with the window's top-left corner at `origin`.
    ///
    /// `norm`, when given, divides the raw weighted sum.
    pub fn eval(
        &self,
        ii: &IntegralImage,
        origin: (usize, usize),
        scale: f64,
        norm: Option<f64>,
    ) -> Result<f64, BoostError> {
        let sf = self.scaled(scale)?;
        let (ew, eh) = sf.extent();
        if origin.0 + ew > ii.width() || origin.1 + eh > ii.height() {
            return Err(BoostError::FeatureOutOfBounds {
                feature: *self,
                origin,
                scale,
            });
        }
        let raw = sf.eval_at(ii, origin.0, origin.1);
        Ok(match norm {
            Some(n) => raw / n,
            None => raw,
        })
    }

    /// Integer feature value at scale 1, no normalization.
    pub fn eval_raw(&self, ii: &IntegralImage, ox: usize, oy: usize) -> i64 {
        self.weighted_rects()
            .iter()
            .map(|(r, w)| *w as i64 * ii.sum_unchecked(ox + r.x, oy + r.y, r.w, r.h) as i64)
            .sum()
    }
}

/// Every feature of the five kinds that fits a `width x height` window.
///
/// Order: kind, then y, x, h, w.
pub fn enumerate_features(width: usize, height: usize) -> Vec<HaarFeature> {
    let mut out = Vec::new();
    for kind in FeatureKind::ALL {
        let (cx, cy) = kind.cells();
        for y in 0..height {
            for x in 0..width {
                for h in (cy..=height - y).step_by(cy) {
                    for w in (cx..=width - x).step_by(cx) {
                        out.push(HaarFeature {
                            kind,
                            x: x as u16,
                            y: y as u16,
                            w: w as u16,
                            h: h as u16,
                        });
                    }
                }
            }
        }
    }
    out
}
