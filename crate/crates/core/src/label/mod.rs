//! The 0.0–9.9 label scale: binning raw task values, raster ground truth,
//! and reading model completions back.

mod bin;
mod binner;
mod completion;
mod raster;

pub use bin::BinLabel;
pub use binner::{BinnerMode, BinningHint, LabelBinner, BINNER_FORMAT_VERSION};
pub use completion::parse_completion;
pub use raster::{aggregate_raster_label, aggregate_window, GridRaster, LABEL_WINDOW_KM};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("all training values are equal")]
    DegenerateDistribution,
    #[error("need at least {need} training values, got {got}")]
    TooFewValues { need: usize, got: usize },
    #[error("non-finite training value {0}")]
    NonFinite(f64),
    #[error("unparseable completion {0:?}")]
    Unparseable(String),
    #[error("point {0} lies outside the raster")]
    OutOfBounds(String),
    #[error("no valid raster cells around {0}")]
    AllNoData(String),
    #[error("raster: {0}")]
    Raster(String),
    #[error("binner format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
