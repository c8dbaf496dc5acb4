use std::path::PathBuf;

use blinkwatch_core::cascade::{save_model, train_cascade_with, CascadeError, CascadeTrainConfig};
use clap::Args;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{list_pgms, read_pgm, write_atomic};

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    /// Directory of positive patches, all the size of the detection window.
    #[arg(long, value_name = "DIR")]
    pub pos: PathBuf,
    /// Directory of negative images; any size at least one window.
    #[arg(long, value_name = "DIR")]
    pub neg: PathBuf,
    /// Minimum per-stage detection rate.
    #[arg(long, default_value_t = 0.995)]
    pub min_detection: f64,
    /// Maximum per-stage false-positive rate.
    #[arg(long, default_value_t = 0.5)]
    pub max_false_positive: f64,
    /// Overall false-positive rate at which training stops.
    #[arg(long, default_value_t = 1e-5)]
    pub target_false_positive: f64,
    #[arg(long, default_value_t = 30)]
    pub max_stages: usize,
    /// Boosting rounds allowed per stage before training aborts.
    #[arg(long, default_value_t = 200)]
    pub max_rounds: usize,
    /// Negative windows harvested for each stage.
    #[arg(long, default_value_t = 1000)]
    pub negatives_per_stage: usize,
}

pub fn run(args: &TrainArgs, cfg: &RunConfig) -> Result<()> {
    let out = cfg
        .out
        .as_deref()
        .ok_or_else(|| CliError::usage("train needs --out for the model file"))?;
    let load = |dir| -> Result<Vec<_>> {
        list_pgms(dir, cfg.strict)?.par_iter().map(|p| read_pgm(p)).collect()
    };
    let positives = load(&args.pos)?;
    let negatives = load(&args.neg)?;
    let tc = CascadeTrainConfig {
        min_detection: args.min_detection,
        max_false_positive: args.max_false_positive,
        target_false_positive: args.target_false_positive,
        max_stages: args.max_stages,
        max_rounds_per_stage: args.max_rounds,
        negatives_per_stage: args.negatives_per_stage,
        ..Default::default()
    };
    tc.validate().map_err(|e| CliError::usage(e.to_string()))?;
    print!("{}", cfg.echo_commented());
    println!(
        "training on {} positives and {} negative images (d >= {}, f <= {}, F = {})",
        positives.len(),
        negatives.len(),
        tc.min_detection,
        tc.max_false_positive,
        tc.target_false_positive
    );
    let outcome = train_cascade_with(&positives, &negatives, &tc, |s| {
        println!(
            "stage {:>2}: rounds {:>3}  d {:.4}  f {:.4}  negatives {}",
            s.stage, s.rounds, s.detection_rate, s.false_positive_rate, s.negatives
        );
    })
    .map_err(|e| match e {
        CascadeError::StageFailed { .. } => CliError::data(format!("training aborted: {e}")),
        other => other.into(),
    })?;
    let bytes = save_model(&outcome.model).map_err(|e| CliError::data(e.to_string()))?;
    write_atomic(out, &bytes)?;
    println!(
        "{:?}: {} stages, {} weak classifiers, overall f {:.3e}; wrote {}",
        outcome.status,
        outcome.model.stages.len(),
        outcome.model.weak_count(),
        outcome.cumulative_false_positive,
        out.display()
    );
    Ok(())
}
