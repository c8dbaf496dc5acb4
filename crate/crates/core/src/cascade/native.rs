//! Native little-endian cascade file.
//!
//! ```text
//! "HCSC" | version u16 | base_w u16 | base_h u16 | stages u32
//! per stage:  threshold f64 | weaks u32
//! per weak:   kind u8 | x u16 | y u16 | w u16 | h u16 | polarity i8 | threshold f64 | alpha f64
//! ```

use thiserror::Error;

use super::{CascadeError, CascadeModel, CascadeStage};
use crate::haarboost::{FeatureKind, HaarFeature, Polarity, StrongClassifier, WeakClassifier, WeightedWeak};

pub const MAGIC: &[u8; 4] = b"HCSC";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelFormatError {
    #[error("not a cascade model file (bad magic)")]
    BadMagic,
    #[error("unsupported model format version {found} (this build reads {FORMAT_VERSION})")]
    VersionMismatch { found: u16 },
    #[error("model file truncated at byte {offset}")]
    Truncated { offset: usize },
    #[error("{0} trailing bytes after the last stage")]
    TrailingBytes(usize),
    #[error("unknown feature kind {0}")]
    BadFeatureKind(u8),
    #[error("invalid polarity {0}")]
    BadPolarity(i8),
    #[error("base window {0}x{1} does not fit the format's u16 fields")]
    TooLarge(usize, usize),
    #[error(transparent)]
    Invariant(#[from] CascadeError),
}

/// Serializes `model`. Fails only when the base window exceeds `u16`.
pub fn save_model(model: &CascadeModel) -> Result<Vec<u8>, ModelFormatError> {
    let (bw, bh) = (model.base_width, model.base_height);
    if bw > u16::MAX as usize || bh > u16::MAX as usize {
        return Err(ModelFormatError::TooLarge(bw, bh));
    }
    let mut out = Vec::with_capacity(16 + model.weak_count() * 34 + model.stages.len() * 12);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(bw as u16).to_le_bytes());
    out.extend_from_slice(&(bh as u16).to_le_bytes());
    out.extend_from_slice(&(model.stages.len() as u32).to_le_bytes());
    for stage in &model.stages {
        out.extend_from_slice(&stage.threshold.to_le_bytes());
        out.extend_from_slice(&(stage.classifier.weaks.len() as u32).to_le_bytes());
        for ww in &stage.classifier.weaks {
            let f = ww.weak.feature;
            out.push(f.kind as u8);
            for v in [f.x, f.y, f.w, f.h] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            out.push(ww.weak.polarity.as_i8() as u8);
            out.extend_from_slice(&ww.weak.threshold.to_le_bytes());
            out.extend_from_slice(&ww.alpha.to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], ModelFormatError> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or(ModelFormatError::Truncated { offset: self.bytes.len() })?;
        self.pos = end;
        Ok(chunk.try_into().expect("slice length is N"))
    }

    fn u8(&mut self) -> Result<u8, ModelFormatError> {
        Ok(self.take::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16, ModelFormatError> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32, ModelFormatError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, ModelFormatError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Parses and validates a native model file.
pub fn load_model(bytes: &[u8]) -> Result<CascadeModel, ModelFormatError> {
    let mut r = Reader { bytes, pos: 0 };
    match bytes.get(..4) {
        Some(m) if m == MAGIC => r.pos = 4,
        Some(_) => return Err(ModelFormatError::BadMagic),
        None => return Err(ModelFormatError::Truncated { offset: bytes.len() }),
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(ModelFormatError::VersionMismatch { found: version });
    }
    let base_width = r.u16()? as usize;
    let base_height = r.u16()? as usize;
    let stage_count = r.u32()? as usize;
    // Counts come from the file; cap preallocation by what the bytes can hold.
    let mut stages = Vec::with_capacity(stage_count.min(bytes.len() / 12));
    for _ in 0..stage_count {
        let threshold = r.f64()?;
        let weak_count = r.u32()? as usize;
        let mut weaks = Vec::with_capacity(weak_count.min(bytes.len() / 34));
        for _ in 0..weak_count {
            let kind_byte = r.u8()?;
            let kind = FeatureKind::from_u8(kind_byte).ok_or(ModelFormatError::BadFeatureKind(kind_byte))?;
            let (x, y, w, h) = (r.u16()?, r.u16()?, r.u16()?, r.u16()?);
            let pol = r.u8()? as i8;
            let polarity = Polarity::from_i8(pol).ok_or(ModelFormatError::BadPolarity(pol))?;
            let wthreshold = r.f64()?;
            let alpha = r.f64()?;
            weaks.push(WeightedWeak {
                alpha,
                weak: WeakClassifier {
                    feature: HaarFeature { kind, x, y, w, h },
                    threshold: wthreshold,
                    polarity,
                },
            });
        }
        stages.push(CascadeStage::new(StrongClassifier::new(weaks), threshold));
    }
    if r.pos != bytes.len() {
        return Err(ModelFormatError::TrailingBytes(bytes.len() - r.pos));
    }
    Ok(CascadeModel::new(base_width, base_height, stages)?)
}
