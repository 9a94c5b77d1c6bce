use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{DatasetError, SplitPlan, TaskDataset};
use crate::label::{BinLabel, BinningHint, LabelBinner};

/// A binner fitted on the training pool and the label of every planned id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanLabels {
    pub binner: LabelBinner,
    pub labels: BTreeMap<String, BinLabel>,
}

/// Fits the binner on the training pool only, so validation and test values
/// never influence bin edges. Pool labels come from the fit itself; the
/// other partitions are encoded.
pub fn label_plan(ds: &TaskDataset, plan: &SplitPlan, hint: BinningHint) -> Result<PlanLabels, DatasetError> {
    let raw: HashMap<&str, f64> = ds.samples.iter().map(|s| (s.id.as_str(), s.raw)).collect();
    let lookup = |id: &String| raw.get(id.as_str()).copied().ok_or_else(|| DatasetError::UnknownId(id.clone()));
    let pool_values = plan.train_pool.iter().map(lookup).collect::<Result<Vec<_>, _>>()?;
    let (binner, pool_labels) = LabelBinner::fit_with_labels(&pool_values, hint)?;
    let mut labels: BTreeMap<String, BinLabel> = plan.train_pool.iter().cloned().zip(pool_labels).collect();
    for id in plan.val.iter().chain(&plan.test) {
        labels.insert(id.clone(), binner.encode(lookup(id)?));
    }
    Ok(PlanLabels { binner, labels })
}
