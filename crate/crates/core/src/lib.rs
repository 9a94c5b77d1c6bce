//! Geospatial prediction with language models: coordinate-anchored prompts
//! built from map data, a 0.0–9.9 label scale, a JSONL corpus boundary for
//! fine-tuning, non-LLM baselines and evaluation.

pub mod adapter;
pub mod baseline;
pub mod dataset;
pub mod eval;
pub mod geo;
pub mod io;
pub mod label;
pub mod mapdata;
pub mod numfmt;
pub mod pipeline;
pub mod prompt;
pub mod rng;
pub mod spatial;
pub mod stats;
