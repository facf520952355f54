//! Experiment harness for boosted discourse parsers: synthetic data, training,
//! parsing, evaluation, boosting curves and parameter-matched comparisons.
//! Every command writes a JSON run manifest next to its outputs.

pub mod commands;
pub mod error;
pub mod manifest;

pub use commands::{
    cmd_compare, cmd_curve, cmd_eval, cmd_parse, cmd_synth, cmd_train, match_hidden_width,
    CompareOptions, ComparisonReport, ContenderReport, CurveOptions, EvalOptions, ParseOptions,
    ParseOutcome, SynthPlan, TrainOptions, WidthMatch,
};
pub use error::HarnessError;
pub use manifest::{manifest_path_for, RunManifest};
