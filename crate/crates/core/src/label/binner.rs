use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BinLabel, LabelError};
use crate::stats;

pub const BINNER_FORMAT_VERSION: u32 = 1;

/// How raw values are spread over the 100 labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinningHint {
    /// Affine min/max scaling; for targets that are already roughly uniform.
    Uniform,
    /// Rank-based equal-occupancy bins.
    Quantile,
}

impl std::str::FromStr for BinningHint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" | "scale" => Ok(Self::Uniform),
            "quantile" => Ok(Self::Quantile),
            other => Err(format!("unknown binning mode {other:?} (expected uniform|quantile)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BinnerMode {
    Scale {
        raw_min: f64,
        raw_max: f64,
    },
    Quantile {
        /// 99 nondecreasing thresholds; `edges[j - 1]` is the lower edge of bin `j`.
        edges: Vec<f64>,
        /// Mean training value of each of the 100 bins.
        bin_means: Vec<f64>,
    },
}

/// A fitted, immutable mapping between raw task values and bin labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelBinner {
    version: u32,
    #[serde(flatten)]
    mode: BinnerMode,
    fitted_on: usize,
}

impl LabelBinner {
    /// Fits on training values only.
    pub fn fit(values: &[f64], hint: BinningHint) -> Result<Self, LabelError> {
        Self::fit_with_labels(values, hint).map(|(b, _)| b)
    }

    /// Fits and also returns the label of every training value. In quantile
    /// mode equal values straddling an edge are split by their position in
    /// `values`, so occupancy stays uniform even with ties.
    pub fn fit_with_labels(values: &[f64], hint: BinningHint) -> Result<(Self, Vec<BinLabel>), LabelError> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(LabelError::NonFinite(*bad));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match hint {
            BinningHint::Uniform => {
                if values.len() < 2 {
                    return Err(LabelError::TooFewValues { need: 2, got: values.len() });
                }
                if min == max {
                    return Err(LabelError::DegenerateDistribution);
                }
                let binner = Self {
                    version: BINNER_FORMAT_VERSION,
                    mode: BinnerMode::Scale { raw_min: min, raw_max: max },
                    fitted_on: values.len(),
                };
                let labels = values.iter().map(|&v| binner.encode(v)).collect();
                Ok((binner, labels))
            }
            BinningHint::Quantile => {
                let n = values.len();
                if n < BinLabel::COUNT {
                    return Err(LabelError::TooFewValues { need: BinLabel::COUNT, got: n });
                }
                if min == max {
                    return Err(LabelError::DegenerateDistribution);
                }
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

                let mut labels = vec![BinLabel::MIN; n];
                let mut members: Vec<Vec<f64>> = vec![Vec::new(); BinLabel::COUNT];
                for (rank, &i) in order.iter().enumerate() {
                    let bin = rank * BinLabel::COUNT / n;
                    labels[i] = BinLabel::from_index(bin).expect("bin < 100");
                    members[bin].push(values[i]);
                }
                let bin_means: Vec<f64> = members
                    .iter()
                    .map(|m| stats::mean(m).expect("every bin is occupied when n >= 100"))
                    .collect();
                let edges: Vec<f64> = (1..BinLabel::COUNT)
                    .map(|j| {
                        let below = *members[j - 1].last().expect("occupied");
                        let above = members[j][0];
                        let mid = below + (above - below) / 2.0;
                        if mid <= below && above > below {
                            above
                        } else {
                            mid
                        }
                    })
                    .collect();
                let binner = Self {
                    version: BINNER_FORMAT_VERSION,
                    mode: BinnerMode::Quantile { edges, bin_means },
                    fitted_on: n,
                };
                Ok((binner, labels))
            }
        }
    }

    pub fn mode(&self) -> &BinnerMode {
        &self.mode
    }

    pub fn fitted_on(&self) -> usize {
        self.fitted_on
    }

    /// Monotone nondecreasing; out-of-range values land in the end bins.
    pub fn encode(&self, raw: f64) -> BinLabel {
        match &self.mode {
            BinnerMode::Scale { raw_min, raw_max } => {
                if raw.is_nan() {
                    return BinLabel::MIN;
                }
                let t = ((raw - raw_min) / (raw_max - raw_min)).clamp(0.0, 1.0);
                let index = (t * 99.0).round() as usize;
                BinLabel::from_index(index.min(99)).expect("index clamped")
            }
            BinnerMode::Quantile { edges, .. } => {
                let index = edges.partition_point(|&e| e <= raw);
                BinLabel::from_index(index).expect("at most 99 edges")
            }
        }
    }

    /// Representative raw value of a label: the bin's training mean in
    /// quantile mode, the affine preimage of the bin centre in scale mode.
    pub fn decode(&self, label: BinLabel) -> f64 {
        match &self.mode {
            BinnerMode::Scale { raw_min, raw_max } => {
                raw_min + (label.index() as f64 / 99.0) * (raw_max - raw_min)
            }
            BinnerMode::Quantile { bin_means, .. } => bin_means[label.index()],
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("binner serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LabelError> {
        let binner: Self = serde_json::from_str(text).map_err(|e| LabelError::Format(e.to_string()))?;
        if binner.version != BINNER_FORMAT_VERSION {
            return Err(LabelError::Format(format!(
                "unsupported binner version {} (expected {BINNER_FORMAT_VERSION})",
                binner.version
            )));
        }
        if let BinnerMode::Quantile { edges, bin_means } = &binner.mode {
            if edges.len() != BinLabel::COUNT - 1 || bin_means.len() != BinLabel::COUNT {
                return Err(LabelError::Format("quantile binner needs 99 edges and 100 means".into()));
            }
            if edges.windows(2).any(|w| w[0] > w[1]) {
                return Err(LabelError::Format("quantile edges must be nondecreasing".into()));
            }
        }
        Ok(binner)
    }

    pub fn save(&self, path: &Path) -> Result<(), LabelError> {
        crate::io::write_string_atomic(path, &self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LabelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
