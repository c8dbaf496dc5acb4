//! Per-stream drowsiness tracking.
//!
//! Each frame contributes an [`EyeObservation`]. The tracker keeps the
//! current eye-closure run, a trailing PERCLOS window and the last head
//! pitch, and maps them to a [`DrowsinessLevel`]:
//!
//! | condition                          | level        |
//! |------------------------------------|--------------|
//! | closure run > T                    | 2 (red)      |
//! | otherwise, \|pitch\| > tolerance   | 1 (yellow)   |
//! | otherwise                          | 0 (green)    |
//!
//! Level changes produce an [`AlertEvent`]; entering level 2 carries the
//! "wake up" message.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack for comparing accumulated timestamp differences against the
/// closure threshold.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrowsinessError {
    #[error("eye centers share x = {0}; pitch is undefined")]
    DegenerateGeometry(f64),
    #[error("timestamp {t} does not follow previous timestamp {last}")]
    NonMonotonicTimestamp { t: f64, last: f64 },
    #[error("invalid tracker configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Angle in degrees of the line through both eye centers against the
/// horizontal: `atan(dy / dx)`.
///
/// The result does not depend on which eye is passed first. Positive when
/// the eye with the larger x sits lower in the image.
pub fn compute_pitch(left: Point, right: Point) -> Result<f64, DrowsinessError> {
    let dx = right.x - left.x;
    let dy = right.y - left.y;
    if dx == 0.0 {
        return Err(DrowsinessError::DegenerateGeometry(left.x));
    }
    Ok((dy / dx).atan().to_degrees())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum DrowsinessLevel {
    Normal = 0,
    Warning = 1,
    Alert = 2,
}

impl DrowsinessLevel {
    pub fn color(self) -> &'static str {
        match self {
            DrowsinessLevel::Normal => "green",
            DrowsinessLevel::Warning => "yellow",
            DrowsinessLevel::Alert => "red",
        }
    }

    fn message(self) -> &'static str {
        match self {
            DrowsinessLevel::Normal => "normal",
            DrowsinessLevel::Warning => "warning",
            DrowsinessLevel::Alert => "wake up",
        }
    }
}

impl From<DrowsinessLevel> for u8 {
    fn from(l: DrowsinessLevel) -> u8 {
        l as u8
    }
}

impl TryFrom<u8> for DrowsinessLevel {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(DrowsinessLevel::Normal),
            1 => Ok(DrowsinessLevel::Warning),
            2 => Ok(DrowsinessLevel::Alert),
            _ => Err(format!("no drowsiness level {v}")),
        }
    }
}

impl fmt::Display for DrowsinessLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", *self as u8, self.color())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// Closure run length, in seconds, above which the driver is drowsy.
    pub closure_threshold: f64,
    /// Trailing PERCLOS window in seconds.
    pub perclos_window: f64,
    /// Pitch magnitude, in degrees, above which the head counts as moving.
    pub pitch_tolerance: f64,
    /// Nominal frame rate; used for the first frame's duration.
    pub fps: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            closure_threshold: 2.0,
            perclos_window: 60.0,
            pitch_tolerance: 5.0,
            fps: 25.0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), DrowsinessError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.closure_threshold) {
            return Err(DrowsinessError::BadConfig(format!(
                "closure threshold must be positive, got {}",
                self.closure_threshold
            )));
        }
        if !positive(self.perclos_window) {
            return Err(DrowsinessError::BadConfig(format!(
                "PERCLOS window must be positive, got {}",
                self.perclos_window
            )));
        }
        if !(self.pitch_tolerance.is_finite() && self.pitch_tolerance >= 0.0) {
            return Err(DrowsinessError::BadConfig(format!(
                "pitch tolerance must be nonnegative, got {}",
                self.pitch_tolerance
            )));
        }
        if !positive(self.fps) {
            return Err(DrowsinessError::BadConfig(format!("fps must be positive, got {}", self.fps)));
        }
        Ok(())
    }
}

/// Maps closure run length and the head-movement flag to a level.
pub fn classify_state(run_length: f64, pitch_flag: bool, cfg: &TrackerConfig) -> DrowsinessLevel {
    if run_length > cfg.closure_threshold + TIME_EPS {
        DrowsinessLevel::Alert
    } else if pitch_flag {
        DrowsinessLevel::Warning
    } else {
        DrowsinessLevel::Normal
    }
}

/// Eye state for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeObservation {
    pub frame: u64,
    pub timestamp: f64,
    pub left: Option<Point>,
    pub right: Option<Point>,
}

impl EyeObservation {
    pub fn new(frame: u64, timestamp: f64, left: Option<Point>, right: Option<Point>) -> Self {
        EyeObservation {
            frame,
            timestamp,
            left,
            right,
        }
    }

    /// Open means both eyes were found; a single missing eye counts as closed.
    pub fn eyes_open(&self) -> bool {
        self.left.is_some() && self.right.is_some()
    }
}

/// PERCLOS over a trailing time window: closed frames / all frames.
#[derive(Debug, Clone)]
pub struct PerclosWindow {
    span: f64,
    frames: VecDeque<(f64, bool)>,
    closed: usize,
}

impl PerclosWindow {
    pub fn new(span: f64) -> Self {
        PerclosWindow {
            span,
            frames: VecDeque::new(),
            closed: 0,
        }
    }

    /// Adds a frame and drops frames at least `span` seconds older than it.
    pub fn push(&mut self, t: f64, closed: bool) {
        self.frames.push_back((t, closed));
        if closed {
            self.closed += 1;
        }
        while let Some(&(t0, c0)) = self.frames.front() {
            if t - t0 < self.span - TIME_EPS {
                break;
            }
            self.frames.pop_front();
            if c0 {
                self.closed -= 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn closed(&self) -> usize {
        self.closed
    }

    /// Closed fraction, or `None` before any frame arrives.
    pub fn value(&self) -> Option<f64> {
        (!self.frames.is_empty()).then(|| self.closed as f64 / self.frames.len() as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(f64, bool)> {
        self.frames.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameAssessment {
    pub frame: u64,
    pub t: f64,
    pub eyes_open: bool,
    pub run_s: f64,
    pub perclos: f64,
    /// Pitch measured on this frame; absent unless both eyes were found.
    pub pitch_deg: Option<f64>,
    #[serde(skip)]
    pub pitch_flag: bool,
    pub level: DrowsinessLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlertEvent {
    pub t: f64,
    pub from: DrowsinessLevel,
    pub to: DrowsinessLevel,
    pub message: String,
}

/// Sequential per-stream state machine.
#[derive(Debug, Clone)]
pub struct DrowsinessTracker {
    cfg: TrackerConfig,
    last_t: Option<f64>,
    /// Timestamp the current closure run is measured from.
    run_start: Option<f64>,
    /// Extra duration credited to a run that began with the stream.
    run_lead: f64,
    perclos: PerclosWindow,
    last_pitch: Option<f64>,
    level: DrowsinessLevel,
}

impl DrowsinessTracker {
    pub fn new(cfg: TrackerConfig) -> Result<Self, DrowsinessError> {
        cfg.validate()?;
        Ok(DrowsinessTracker {
            cfg,
            last_t: None,
            run_start: None,
            run_lead: 0.0,
            perclos: PerclosWindow::new(cfg.perclos_window),
            last_pitch: None,
            level: DrowsinessLevel::Normal,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn level(&self) -> DrowsinessLevel {
        self.level
    }

    pub fn perclos_window(&self) -> &PerclosWindow {
        &self.perclos
    }

    /// Consumes one frame.
    ///
    /// A closed frame extends the run to `t - t_open`, where `t_open` is the
    /// timestamp of the last open frame (or one nominal frame period before
    /// the stream's first frame). An open frame resets the run and refreshes
    /// the pitch.
    pub fn update(
        &mut self,
        obs: &EyeObservation,
    ) -> Result<(FrameAssessment, Option<AlertEvent>), DrowsinessError> {
        let t = obs.timestamp;
        if let Some(last) = self.last_t {
            if t.partial_cmp(&last) != Some(std::cmp::Ordering::Greater) {
                return Err(DrowsinessError::NonMonotonicTimestamp { t, last });
            }
        } else if !t.is_finite() {
            return Err(DrowsinessError::NonMonotonicTimestamp { t, last: f64::NAN });
        }
        let open = obs.eyes_open();
        let mut pitch = None;
        let run = if open {
            self.run_start = Some(t);
            self.run_lead = 0.0;
            if let (Some(l), Some(r)) = (obs.left, obs.right) {
                pitch = compute_pitch(l, r).ok();
                if pitch.is_some() {
                    self.last_pitch = pitch;
                }
            }
            0.0
        } else {
            let start = match (self.run_start, self.last_t) {
                (Some(s), _) => s,
                (None, Some(last)) => last,
                (None, None) => {
                    self.run_lead = 1.0 / self.cfg.fps;
                    t
                }
            };
            self.run_start = Some(start);
            t - start + self.run_lead
        };
        self.last_t = Some(t);
        self.perclos.push(t, !open);

        let pitch_flag = self
            .last_pitch
            .is_some_and(|p| p.abs() > self.cfg.pitch_tolerance);
        let level = classify_state(run, pitch_flag, &self.cfg);
        let event = (level != self.level).then(|| AlertEvent {
            t,
            from: self.level,
            to: level,
            message: level.message().to_string(),
        });
        self.level = level;
        Ok((
            FrameAssessment {
                frame: obs.frame,
                t,
                eyes_open: open,
                run_s: run,
                perclos: self.perclos.value().unwrap_or(0.0),
                pitch_deg: pitch,
                pitch_flag,
                level,
            },
            event,
        ))
    }
}

/// One line of the tracker's output stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StreamRecord {
    Frame(FrameAssessment),
    Alert(AlertEvent),
}

impl StreamRecord {
    /// Serializes as a single JSON line, without the trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Runs a whole observation stream and returns the interleaved records.
pub fn replay(
    cfg: TrackerConfig,
    observations: &[EyeObservation],
) -> Result<Vec<StreamRecord>, DrowsinessError> {
    let mut tracker = DrowsinessTracker::new(cfg)?;
    let mut out = Vec::with_capacity(observations.len());
    for obs in observations {
        let (frame, alert) = tracker.update(obs)?;
        out.push(StreamRecord::Frame(frame));
        if let Some(a) = alert {
            out.push(StreamRecord::Alert(a));
        }
    }
    Ok(out)
}
