use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{DatasetError, TaskDataset};
use crate::rng::shuffle_key;

pub const DEFAULT_EVAL_SIZE: usize = 2000;
pub const DEFAULT_SUBSET_SIZES: [usize; 3] = [100, 1000, 10_000];

/// Disjoint train/val/test partitions plus nested training subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_pool: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
    /// Size to ids; smaller subsets are prefixes of larger ones.
    pub train_subsets: BTreeMap<usize, Vec<String>>,
}

impl SplitPlan {
    pub fn subset(&self, size: usize) -> Option<&[String]> {
        self.train_subsets.get(&size).map(|v| v.as_slice())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        serde_json::from_str(text).map_err(|e| DatasetError::InvalidRecord {
            line: e.line(),
            reason: e.to_string(),
        })
    }
}

fn order_by_key<'a>(ids: impl Iterator<Item = &'a str>, seed: u64, purpose: &str) -> Vec<String> {
    let mut keyed: Vec<(u64, &str)> = ids.map(|id| (shuffle_key(seed, purpose, id), id)).collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, id)| id.to_string()).collect()
}

/// Partitions first (test, then val, then the rest as the training pool),
/// then draws nested training subsets from the pool. Every draw is keyed by
/// `(seed, id)`, so the plan does not depend on input order.
pub fn make_splits(
    ds: &TaskDataset,
    seed: u64,
    val_n: usize,
    test_n: usize,
    subset_sizes: &[usize],
) -> Result<SplitPlan, DatasetError> {
    let largest = subset_sizes.iter().copied().max().unwrap_or(0);
    let need = val_n + test_n + largest.max(1);
    if ds.len() < need {
        return Err(DatasetError::TooFewSamples { need, got: ds.len() });
    }
    let shuffled = order_by_key(ds.samples.iter().map(|s| s.id.as_str()), seed, "split");
    let test = shuffled[..test_n].to_vec();
    let val = shuffled[test_n..test_n + val_n].to_vec();
    let mut train_pool = shuffled[test_n + val_n..].to_vec();

    let subset_order = order_by_key(train_pool.iter().map(|s| s.as_str()), seed, "subset");
    let train_subsets = subset_sizes
        .iter()
        .map(|&size| (size, subset_order[..size].to_vec()))
        .collect();
    train_pool.sort();

    let plan = SplitPlan {
        seed,
        train_pool,
        val,
        test,
        train_subsets,
    };
    check_overlap(ds, &plan)?;
    Ok(plan)
}

/// Fails with every id involved when a training-subset coordinate (5-decimal
/// match) also appears in validation or test, or when an id sits in two
/// partitions.
pub fn check_overlap(ds: &TaskDataset, plan: &SplitPlan) -> Result<(), DatasetError> {
    let by_id: HashMap<&str, String> = ds.samples.iter().map(|s| (s.id.as_str(), s.point.key5())).collect();
    let key_of = |id: &str| by_id.get(id).cloned().ok_or_else(|| DatasetError::UnknownId(id.to_string()));

    let mut offending: Vec<String> = Vec::new();
    let mut partition: HashSet<&str> = HashSet::new();
    for id in plan.train_pool.iter().chain(&plan.val).chain(&plan.test) {
        if !partition.insert(id.as_str()) {
            offending.push(id.clone());
        }
    }
    let pool: HashSet<&str> = plan.train_pool.iter().map(|s| s.as_str()).collect();

    let mut eval_keys: HashMap<String, Vec<&str>> = HashMap::new();
    for id in plan.val.iter().chain(&plan.test) {
        eval_keys.entry(key_of(id)?).or_default().push(id);
    }
    let mut seen_train: HashSet<&str> = HashSet::new();
    for id in plan.train_subsets.values().flatten() {
        if !pool.contains(id.as_str()) {
            offending.push(id.clone());
        }
        if !seen_train.insert(id.as_str()) {
            continue;
        }
        if let Some(clash) = eval_keys.get(&key_of(id)?) {
            offending.push(id.clone());
            offending.extend(clash.iter().map(|s| s.to_string()));
        }
    }
    if offending.is_empty() {
        return Ok(());
    }
    offending.sort();
    offending.dedup();
    Err(DatasetError::OverlapDetected { ids: offending })
}
