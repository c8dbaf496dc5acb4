use std::path::{Path, PathBuf};

use blinkwatch_core::eval::{load_bioid, run_pipeline, EvalReport, GdrReport};
use clap::Args;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{load_cascade, write_atomic};

#[derive(Args, Debug, Clone)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["dataset", "flags"]))]
pub struct EvalArgs {
    /// BioID directory of paired .pgm/.eye files.
    pub dataset: Option<PathBuf>,
    /// Precomputed outcomes instead of detection: one `id gdr1 gdr2 gdr3`
    /// line per sample, each flag 0 or 1.
    #[arg(long, value_name = "FILE")]
    pub flags: Option<PathBuf>,
}

fn parse_flags(path: &Path) -> Result<EvalReport> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut cols: [Vec<bool>; 3] = Default::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || CliError::data(format!("{}:{}: expected `id 0|1 0|1 0|1`", path.display(), n + 1));
        if fields.len() != 4 {
            return Err(bad());
        }
        for (col, f) in cols.iter_mut().zip(&fields[1..]) {
            col.push(match *f {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            });
        }
    }
    let [g1, g2, g3] = cols;
    Ok(EvalReport::from_reports(
        GdrReport::from_flags("GDR1", g1)?,
        GdrReport::from_flags("GDR2", g2)?,
        GdrReport::from_flags("GDR3", g3)?,
    )?)
}

fn from_dataset(dir: &Path, cfg: &RunConfig) -> Result<EvalReport> {
    let face = load_cascade(cfg.face_model()?)?;
    let eye = load_cascade(cfg.eye_model()?)?;
    let samples = load_bioid(dir, cfg.strict)?;
    log::info!("evaluating {} samples", samples.len());
    let results = run_pipeline(&face, &eye, &cfg.face, &cfg.eye, &samples)?;
    Ok(EvalReport::from_results(&results)?)
}

pub fn run(args: &EvalArgs, cfg: &RunConfig) -> Result<()> {
    let report = match (&args.flags, &args.dataset) {
        (Some(flags), _) => parse_flags(flags)?,
        (None, Some(dir)) => from_dataset(dir, cfg)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    print!("{}{report}", cfg.echo_commented());
    if let Some(out) = &cfg.out {
        let doc = json!({ "config": cfg, "report": report });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
        write_atomic(out, text.as_bytes())?;
    }
    Ok(())
}
