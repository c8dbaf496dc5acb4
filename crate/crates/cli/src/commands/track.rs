use std::path::Path;

use blinkwatch_core::drowsiness::{DrowsinessTracker, EyeObservation, StreamRecord};
use rayon::prelude::*;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{emit, list_pgms, load_cascade, read_pgm};
use crate::pipeline::{analyze, Models};

/// Detection runs per frame in parallel; the tracker then consumes the
/// observations in file-name order.
pub fn run(frames: &Path, cfg: &RunConfig) -> Result<()> {
    let models = Models {
        face: load_cascade(cfg.face_model()?)?,
        eye: load_cascade(cfg.eye_model()?)?,
    };
    let paths = list_pgms(frames, cfg.strict)?;
    if paths.is_empty() {
        return Err(CliError::usage(format!("{}: no PGM frames", frames.display())));
    }
    let fps = cfg.tracker.fps;
    let observations: Vec<EyeObservation> = paths
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let a = analyze(&models, cfg, &read_pgm(p)?)?;
            Ok(EyeObservation::new(i as u64, i as f64 / fps, a.left_center(), a.right_center()))
        })
        .collect::<Result<_>>()?;

    let mut tracker = DrowsinessTracker::new(cfg.tracker)?;
    let mut text = String::new();
    let mut histogram = [0usize; 3];
    let mut alerts = 0;
    for obs in &observations {
        let (frame, alert) = tracker.update(obs)?;
        histogram[frame.level as usize] += 1;
        text.push_str(&StreamRecord::Frame(frame).to_json_line());
        text.push('\n');
        if let Some(a) = alert {
            alerts += 1;
            text.push_str(&StreamRecord::Alert(a).to_json_line());
            text.push('\n');
        }
    }
    let footer = json!({
        "summary": {
            "frames": observations.len(),
            "levels": { "0": histogram[0], "1": histogram[1], "2": histogram[2] },
            "alerts": alerts,
            "config": cfg,
        }
    });
    text.push_str(&footer.to_string());
    text.push('\n');
    emit(cfg.out.as_deref(), &text)
}
