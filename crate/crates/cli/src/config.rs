//! Run configuration: command-line flags over a key=value file over defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use blinkwatch_core::cascade::DetectParams;
use blinkwatch_core::drowsiness::TrackerConfig;
use clap::Args;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Faces need this many merged neighbours unless overridden.
pub const DEFAULT_FACE_MIN_NEIGHBORS: usize = 3;

const KEYS: &[&str] = &[
    "face_model",
    "eye_model",
    "scale_factor",
    "step",
    "min_size",
    "min_neighbors",
    "fps",
    "closure_threshold",
    "pitch_tolerance",
    "perclos_window",
    "strict",
    "out",
];

#[derive(Args, Debug, Clone, Default)]
pub struct SharedArgs {
    /// Plain key=value file; keys match the long flag names with underscores.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Face cascade (native model or OpenCV XML).
    #[arg(long, global = true, value_name = "PATH")]
    pub face_model: Option<PathBuf>,
    /// Eye cascade (native model or OpenCV XML).
    #[arg(long, global = true, value_name = "PATH")]
    pub eye_model: Option<PathBuf>,
    /// Window growth between pyramid levels [default: 1.2].
    #[arg(long, global = true)]
    pub scale_factor: Option<f64>,
    /// Window step as a fraction of the window width [default: 0.05].
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// Smallest face window width in pixels [default: the cascade's base window].
    #[arg(long, global = true)]
    pub min_size: Option<usize>,
    /// Merged neighbours a face detection needs [default: 3].
    #[arg(long, global = true)]
    pub min_neighbors: Option<usize>,
    /// Frame rate used to timestamp frame streams [default: 25].
    #[arg(long, global = true)]
    pub fps: Option<f64>,
    /// Eye-closure run, in seconds, that raises the alert [default: 2].
    #[arg(long, global = true)]
    pub closure_threshold: Option<f64>,
    /// Head pitch, in degrees, that counts as movement [default: 5].
    #[arg(long, global = true)]
    pub pitch_tolerance: Option<f64>,
    /// Trailing PERCLOS window in seconds [default: 60].
    #[arg(long, global = true)]
    pub perclos_window: Option<f64>,
    /// Fail on unpaired or unexpected input files instead of skipping them.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Output file; written in full or not at all.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub face_model: Option<PathBuf>,
    pub eye_model: Option<PathBuf>,
    pub face: DetectParams,
    pub eye: DetectParams,
    pub tracker: TrackerConfig,
    pub strict: bool,
    pub out: Option<PathBuf>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(format!("config line {}: unknown key {key:?}", n + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    file.get(key)
        .map(|v| {
            v.parse()
                .map_err(|e| CliError::usage(format!("config key {key}: {v:?}: {e}")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(args: &SharedArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                match args.$field.clone() {
                    Some(v) => v,
                    None => from_file(&file, stringify!($field))?.unwrap_or($default),
                }
            };
        }
        let path = |flag: &Option<PathBuf>, key: &str| {
            flag.clone()
                .or_else(|| file.get(key).map(PathBuf::from))
                .filter(|p| !p.as_os_str().is_empty())
        };
        let defaults = DetectParams::default();
        let tracker_defaults = TrackerConfig::default();
        let face = DetectParams {
            scale_factor: pick!(scale_factor, defaults.scale_factor),
            step_fraction: pick!(step, defaults.step_fraction),
            min_size: pick!(min_size, 0),
            max_size: 0,
            min_neighbors: pick!(min_neighbors, DEFAULT_FACE_MIN_NEIGHBORS),
        };
        let eye = DetectParams {
            min_size: 0,
            min_neighbors: 0,
            ..face
        };
        let tracker = TrackerConfig {
            closure_threshold: pick!(closure_threshold, tracker_defaults.closure_threshold),
            perclos_window: pick!(perclos_window, tracker_defaults.perclos_window),
            pitch_tolerance: pick!(pitch_tolerance, tracker_defaults.pitch_tolerance),
            fps: pick!(fps, tracker_defaults.fps),
        };
        let strict = args.strict || from_file(&file, "strict")?.unwrap_or(false);
        let out = path(&args.out, "out");

        face.validate()?;
        tracker.validate()?;
        let cfg = RunConfig {
            face_model: path(&args.face_model, "face_model"),
            eye_model: path(&args.eye_model, "eye_model"),
            face,
            eye,
            tracker,
            strict,
            out,
        };
        for path in cfg.face_model.iter().chain(&cfg.eye_model) {
            if !path.is_file() {
                return Err(CliError::io(path, "model file not found"));
            }
        }
        Ok(cfg)
    }

    pub fn face_model(&self) -> Result<&Path> {
        self.face_model
            .as_deref()
            .ok_or_else(|| CliError::usage("--face-model is required"))
    }

    pub fn eye_model(&self) -> Result<&Path> {
        self.eye_model
            .as_deref()
            .ok_or_else(|| CliError::usage("--eye-model is required"))
    }

    /// The effective settings in the config-file format.
    pub fn echo(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut s = String::new();
        let _ = writeln!(s, "face_model = {}", path(&self.face_model));
        let _ = writeln!(s, "eye_model = {}", path(&self.eye_model));
        let _ = writeln!(s, "scale_factor = {}", self.face.scale_factor);
        let _ = writeln!(s, "step = {}", self.face.step_fraction);
        let _ = writeln!(s, "min_size = {}", self.face.min_size);
        let _ = writeln!(s, "min_neighbors = {}", self.face.min_neighbors);
        let _ = writeln!(s, "fps = {}", self.tracker.fps);
        let _ = writeln!(s, "closure_threshold = {}", self.tracker.closure_threshold);
        let _ = writeln!(s, "pitch_tolerance = {}", self.tracker.pitch_tolerance);
        let _ = writeln!(s, "perclos_window = {}", self.tracker.perclos_window);
        let _ = writeln!(s, "strict = {}", self.strict);
        let _ = writeln!(s, "out = {}", path(&self.out));
        s
    }

    /// [`echo`](Self::echo) as `#` comment lines.
    pub fn echo_commented(&self) -> String {
        self.echo().lines().map(|l| format!("# {l}\n")).collect()
    }
}
