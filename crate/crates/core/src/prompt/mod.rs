//! Prompt text: the coordinate/address/nearby-places template, its ablation
//! variants, and few-shot contexts.

mod fewshot;
mod parse;
mod render;

pub use fewshot::{assemble_few_shot, ChatMessage, FewShotAssembler, FewShotContext, LabeledPrompt, SYSTEM_MESSAGES};
pub use parse::{ParsedNearby, ParsedPrompt};
pub use render::{ablation_variants, render_prompt, Ablation, PromptComponents, PromptInputs, PromptRecord};

use thiserror::Error;

/// Scale suffix of the task line; the label follows the trailing space.
pub const SCALE_SUFFIX: &str = " (On a Scale from 0.0 to 9.9): ";

/// Task names used for the benchmark datasets.
pub const DEFAULT_TASK_NAMES: [&str; 8] = [
    "Population Density",
    "Asset Wealth",
    "Women's Education",
    "Sanitation",
    "Women's BMI",
    "Mean Income",
    "Hispanic/Latino to Non-Hispanic/Latino Ratio",
    "Home Value",
];

#[derive(Debug, Error, PartialEq)]
pub enum PromptError {
    #[error("component {0} requested but its data is missing")]
    MissingComponentData(&'static str),
    #[error("a prompt needs at least one component")]
    NoComponents,
    #[error("need at least {need} training samples, got {got}")]
    InsufficientTrainingData { need: usize, got: usize },
    #[error("malformed prompt: {0}")]
    Malformed(String),
}
