//! Import of stump-based Haar cascades in the OpenCV XML dialects.
//!
//! Two layouts are read: the older `opencv-haar-classifier` one (`<size>`,
//! `<trees>`, `<left_val>`/`<right_val>`) and the `opencv-cascade-classifier`
//! one (`<internalNodes>`, `<leafValues>`, shared `<features>` table) in which
//! the stock pretrained cascades are distributed today. Only depth-1 trees
//! over upright features are accepted.
//!
//! A stump there adds `left` to the stage sum when
//! `sum(w_i * rect_i) / (A * sd) < t` and `right` otherwise, where `A` is the
//! area of the window shrunk by one pixel per side. Each stump is mapped to
//! an `alpha * h(x)` term plus a constant folded into the stage threshold.

use roxmltree::{Document, Node};
use thiserror::Error;

use super::{CascadeModel, CascadeStage};
use crate::haarboost::{FeatureKind, HaarFeature, Polarity, StrongClassifier, WeakClassifier, WeightedWeak};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LegacyXmlError {
    #[error("malformed XML: {0}")]
    Malformed(String),
    #[error("unsupported cascade dialect: {0}")]
    UnsupportedDialect(String),
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("stage {stage} weak {weak}: tree deeper than one split")]
    TreeTooDeep { stage: usize, weak: usize },
    #[error("missing or invalid <{0}>")]
    Field(String),
    #[error("converted model is invalid: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, LegacyXmlError>;

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|n| n.is_element())
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    elements(node).find(|n| n.has_tag_name(name))
}

fn req<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Result<Node<'a, 'i>> {
    child(node, name).ok_or_else(|| LegacyXmlError::Field(name.to_string()))
}

fn numbers(node: Node, name: &str) -> Result<Vec<f64>> {
    node.text()
        .unwrap_or("")
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| LegacyXmlError::Field(name.to_string()))
}

fn number(node: Node, name: &str) -> Result<f64> {
    match numbers(req(node, name)?, name)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(LegacyXmlError::Field(name.to_string())),
    }
}

/// A weighted rectangle as written in the file: x, y, w, h, weight.
type FileRect = (usize, usize, usize, usize, f64);

fn parse_rects(feature: Node) -> Result<Vec<FileRect>> {
    if let Some(t) = child(feature, "tilted") {
        if numbers(t, "tilted")?.first().copied().unwrap_or(0.0) != 0.0 {
            return Err(LegacyXmlError::UnsupportedFeature("tilted (45 degree) feature".into()));
        }
    }
    let mut out = Vec::new();
    for r in elements(req(feature, "rects")?) {
        match numbers(r, "rects")?.as_slice() {
            &[x, y, w, h, wt] if x >= 0.0 && y >= 0.0 && w >= 0.0 && h >= 0.0 => {
                out.push((x as usize, y as usize, w as usize, h as usize, wt))
            }
            _ => return Err(LegacyXmlError::Field("rects".into())),
        }
    }
    if out.is_empty() {
        return Err(LegacyXmlError::Field("rects".into()));
    }
    Ok(out)
}

/// Finds the canonical feature whose per-pixel weight map equals the file's
/// rect list up to a nonzero factor `s`.
fn canonicalize(rects: &[FileRect]) -> Result<(HaarFeature, f64)> {
    let x0 = rects.iter().map(|r| r.0).min().unwrap_or(0);
    let y0 = rects.iter().map(|r| r.1).min().unwrap_or(0);
    let x1 = rects.iter().map(|r| r.0 + r.2).max().unwrap_or(0);
    let y1 = rects.iter().map(|r| r.1 + r.3).max().unwrap_or(0);
    let (w, h) = (x1 - x0, y1 - y0);
    let describe = || format!("rect layout {rects:?} is not one of the five upright kinds");
    if w == 0 || h == 0 || w > u16::MAX as usize || h > u16::MAX as usize {
        return Err(LegacyXmlError::UnsupportedFeature(describe()));
    }
    let mut map = vec![0.0; w * h];
    for &(rx, ry, rw, rh, wt) in rects {
        for y in ry - y0..ry - y0 + rh {
            for x in rx - x0..rx - x0 + rw {
                map[y * w + x] += wt;
            }
        }
    }
    for kind in FeatureKind::ALL {
        let Ok(feature) = HaarFeature::new(kind, x0 as u16, y0 as u16, w as u16, h as u16) else {
            continue;
        };
        let mut canon = vec![0.0; w * h];
        for (r, wt) in feature.weighted_rects() {
            for y in r.y - y0..r.bottom() - y0 {
                for x in r.x - x0..r.right() - x0 {
                    canon[y * w + x] = wt as f64;
                }
            }
        }
        let s = map[0] / canon[0];
        if s == 0.0 || !s.is_finite() {
            continue;
        }
        let tol = 1e-9 * s.abs().max(1.0);
        if map.iter().zip(&canon).all(|(m, c)| (m - s * c).abs() <= tol) {
            return Ok((feature, s));
        }
    }
    Err(LegacyXmlError::UnsupportedFeature(describe()))
}

/// Raw stump as read from the file.
struct FileStump {
    rects: Vec<FileRect>,
    threshold: f64,
    left: f64,
    right: f64,
}

struct FileStage {
    threshold: f64,
    stumps: Vec<FileStump>,
}

fn convert(base_w: usize, base_h: usize, stages: Vec<FileStage>) -> Result<CascadeModel> {
    if base_w < 3 || base_h < 3 {
        return Err(LegacyXmlError::Field("width/height".into()));
    }
    let inner_area = ((base_w - 2) * (base_h - 2)) as f64;
    let mut out = Vec::with_capacity(stages.len());
    for stage in stages {
        let mut offset = 0.0;
        let mut weaks = Vec::with_capacity(stage.stumps.len());
        for st in stage.stumps {
            let (feature, s) = canonicalize(&st.rects)?;
            // File test `s * n / inner_area < t` rewritten over our normalized value n.
            let threshold = st.threshold * inner_area / s;
            let left_polarity = if s > 0.0 {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            let (alpha, polarity) = if st.left >= st.right {
                offset += st.right;
                (st.left - st.right, left_polarity)
            } else {
                offset += st.left;
                (st.right - st.left, left_polarity.flipped())
            };
            weaks.push(WeightedWeak {
                alpha,
                weak: WeakClassifier {
                    feature,
                    threshold,
                    polarity,
                },
            });
        }
        out.push(CascadeStage::new(
            StrongClassifier::new(weaks),
            stage.threshold - offset,
        ));
    }
    CascadeModel::new(base_w, base_h, out).map_err(|e| LegacyXmlError::Invalid(e.to_string()))
}

fn parse_new_dialect(root: Node) -> Result<CascadeModel> {
    if let Some(st) = child(root, "stageType") {
        if st.text().map(str::trim) != Some("BOOST") {
            return Err(LegacyXmlError::UnsupportedDialect(format!(
                "stage type {:?}",
                st.text().unwrap_or("")
            )));
        }
    }
    let ft = req(root, "featureType")?.text().unwrap_or("").trim().to_string();
    if ft != "HAAR" {
        return Err(LegacyXmlError::UnsupportedDialect(format!("feature type {ft:?}")));
    }
    let width = number(root, "width")? as usize;
    let height = number(root, "height")? as usize;

    let features = elements(req(root, "features")?)
        .map(parse_rects)
        .collect::<Result<Vec<_>>>()?;

    let mut stages = Vec::new();
    for (si, stage) in elements(req(root, "stages")?).enumerate() {
        let threshold = number(stage, "stageThreshold")?;
        let mut stumps = Vec::new();
        for (wi, weak) in elements(req(stage, "weakClassifiers")?).enumerate() {
            let nodes = numbers(req(weak, "internalNodes")?, "internalNodes")?;
            let leaves = numbers(req(weak, "leafValues")?, "leafValues")?;
            if nodes.len() != 4 || leaves.len() != 2 {
                return Err(LegacyXmlError::TreeTooDeep { stage: si, weak: wi });
            }
            let fi = nodes[2];
            if fi < 0.0 || fi as usize >= features.len() || fi.fract() != 0.0 {
                return Err(LegacyXmlError::Field("internalNodes".into()));
            }
            stumps.push(FileStump {
                rects: features[fi as usize].clone(),
                threshold: nodes[3],
                left: leaves[0],
                right: leaves[1],
            });
        }
        stages.push(FileStage { threshold, stumps });
    }
    convert(width, height, stages)
}

fn parse_old_dialect(root: Node) -> Result<CascadeModel> {
    let size = numbers(req(root, "size")?, "size")?;
    let [w, h] = size.as_slice() else {
        return Err(LegacyXmlError::Field("size".into()));
    };
    let mut stages = Vec::new();
    for (si, stage) in elements(req(root, "stages")?).enumerate() {
        let threshold = number(stage, "stage_threshold")?;
        let mut stumps = Vec::new();
        for (wi, tree) in elements(req(stage, "trees")?).enumerate() {
            let nodes: Vec<_> = elements(tree).collect();
            let [node] = nodes.as_slice() else {
                return Err(LegacyXmlError::TreeTooDeep { stage: si, weak: wi });
            };
            if child(*node, "left_node").is_some() || child(*node, "right_node").is_some() {
                return Err(LegacyXmlError::TreeTooDeep { stage: si, weak: wi });
            }
            stumps.push(FileStump {
                rects: parse_rects(req(*node, "feature")?)?,
                threshold: number(*node, "threshold")?,
                left: number(*node, "left_val")?,
                right: number(*node, "right_val")?,
            });
        }
        stages.push(FileStage { threshold, stumps });
    }
    convert(*w as usize, *h as usize, stages)
}

/// Parses a stump-based OpenCV Haar cascade into a [`CascadeModel`].
pub fn parse_legacy_cascade_xml(bytes: &[u8]) -> Result<CascadeModel> {
    let text = std::str::from_utf8(bytes).map_err(|e| LegacyXmlError::Malformed(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| LegacyXmlError::Malformed(e.to_string()))?;
    let storage = doc.root_element();
    let cascade = elements(storage)
        .find(|n| n.attribute("type_id").is_some())
        .or_else(|| elements(storage).next())
        .ok_or_else(|| LegacyXmlError::UnsupportedDialect("no cascade element".into()))?;
    match cascade.attribute("type_id") {
        Some("opencv-haar-classifier") => parse_old_dialect(cascade),
        Some("opencv-cascade-classifier") => parse_new_dialect(cascade),
        None if child(cascade, "featureType").is_some() => parse_new_dialect(cascade),
        Some(other) => Err(LegacyXmlError::UnsupportedDialect(format!("type_id {other:?}"))),
        None => Err(LegacyXmlError::UnsupportedDialect(format!(
            "unrecognized element <{}>",
            cascade.tag_name().name()
        ))),
    }
}
