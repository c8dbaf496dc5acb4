use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use blinkwatch_core::cascade::{parse_legacy_cascade_xml, save_model, CascadeModel};
use clap::Subcommand;

use crate::error::{model_error, CliError, Result};
use crate::io::{load_cascade, write_atomic};

#[derive(Subcommand, Debug, Clone)]
pub enum ModelCommand {
    /// Convert an OpenCV cascade XML into the native model format.
    Convert { input: PathBuf, output: PathBuf },
    /// Print stage and feature statistics for a native or XML model.
    Inspect { model: PathBuf },
}

pub fn summary(m: &CascadeModel) -> String {
    let mut kinds: BTreeMap<String, usize> = BTreeMap::new();
    for stage in &m.stages {
        for w in &stage.classifier.weaks {
            *kinds.entry(format!("{:?}", w.weak.feature.kind)).or_default() += 1;
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "base window {}x{}", m.base_width, m.base_height);
    let _ = writeln!(s, "stages {}", m.stages.len());
    let _ = writeln!(s, "weak classifiers {}", m.weak_count());
    for (kind, n) in &kinds {
        let _ = writeln!(s, "  {kind:<16} {n}");
    }
    let _ = writeln!(s, "{:>5} {:>6} {:>12}", "stage", "weaks", "threshold");
    for (i, stage) in m.stages.iter().enumerate() {
        let _ = writeln!(s, "{i:>5} {:>6} {:>12.6}", stage.classifier.weaks.len(), stage.threshold);
    }
    s
}

fn convert(input: &Path, output: &Path) -> Result<()> {
    let bytes = std::fs::read(input).map_err(|e| CliError::io(input, e))?;
    let model = parse_legacy_cascade_xml(&bytes).map_err(|e| model_error(input, e))?;
    let native = save_model(&model).map_err(|e| model_error(input, e))?;
    write_atomic(output, &native)?;
    println!(
        "converted {} stages, {} weak classifiers to {}",
        model.stages.len(),
        model.weak_count(),
        output.display()
    );
    Ok(())
}

pub fn run(cmd: &ModelCommand) -> Result<()> {
    match cmd {
        ModelCommand::Convert { input, output } => convert(input, output),
        ModelCommand::Inspect { model } => {
            print!("{}", summary(&load_cascade(model)?));
            Ok(())
        }
    }
}
