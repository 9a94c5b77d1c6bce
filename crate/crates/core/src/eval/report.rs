use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{mae, median_split_bias, pearson_r2, EvalError};
use crate::adapter::PredictionSet;
use crate::label::{BinLabel, LabelBinner};

/// Metrics for one prediction set against ground truth, on the bin scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub provenance: String,
    /// `None` when undefined (zero variance or fewer than two pairs).
    pub r_squared: Option<f64>,
    pub mae: Option<f64>,
    /// MAE after decoding both sides back to raw units, when a binner is supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mae_decoded: Option<f64>,
    pub n_evaluated: usize,
    pub n_unparseable: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub slices: BTreeMap<String, SliceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub mae: Option<f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EvalError> {
        serde_json::from_str(text).map_err(|e| EvalError::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), EvalError> {
        crate::io::write_string_atomic(path, &self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Scores `predictions` against `truths`. Every predicted id must have a
/// truth; unparseable outcomes are counted but never scored.
pub fn evaluate(
    predictions: &PredictionSet,
    truths: &BTreeMap<String, BinLabel>,
    binner: Option<&LabelBinner>,
) -> Result<EvalReport, EvalError> {
    let mut p = Vec::with_capacity(predictions.len());
    let mut t = Vec::with_capacity(predictions.len());
    let mut pairs = Vec::with_capacity(predictions.len());
    let mut n_unparseable = 0;
    for (id, outcome) in &predictions.outcomes {
        let truth = *truths.get(id).ok_or_else(|| EvalError::UnknownId(id.clone()))?;
        match outcome.label() {
            Some(label) => {
                p.push(label.value());
                t.push(truth.value());
                pairs.push((label, truth));
            }
            None => n_unparseable += 1,
        }
    }
    let mae_value = if p.is_empty() { None } else { Some(mae(&p, &t)?) };
    let r_squared = match pearson_r2(&p, &t) {
        Ok(v) => Some(v),
        Err(EvalError::ZeroVariance | EvalError::TooFewPairs { .. } | EvalError::EmptyInput) => None,
        Err(e) => return Err(e),
    };
    let mae_decoded = match binner {
        Some(b) if !pairs.is_empty() => {
            let dp: Vec<f64> = pairs.iter().map(|(l, _)| b.decode(*l)).collect();
            let dt: Vec<f64> = pairs.iter().map(|(_, l)| b.decode(*l)).collect();
            Some(mae(&dp, &dt)?)
        }
        _ => None,
    };
    let mut slices = BTreeMap::new();
    if p.len() >= 4 {
        let (above, below) = median_split_bias(&p, &t)?;
        slices.insert("above_median".to_string(), SliceReport { mae: above });
        slices.insert("at_or_below_median".to_string(), SliceReport { mae: below });
    }
    Ok(EvalReport {
        provenance: predictions.provenance.clone(),
        r_squared,
        mae: mae_value,
        mae_decoded,
        n_evaluated: p.len(),
        n_unparseable,
        slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Outcome;

    fn label(s: &str) -> BinLabel {
        BinLabel::parse(s).unwrap()
    }

    #[test]
    fn counts_and_exclusion() {
        let truths: BTreeMap<String, BinLabel> = [("a", "1.0"), ("b", "2.0"), ("c", "3.0"), ("d", "5.0"), ("e", "9.0")]
            .iter()
            .map(|(k, v)| (k.to_string(), label(v)))
            .collect();
        let mut set = PredictionSet::new("test");
        for (id, v) in [("a", "1.0"), ("b", "2.0"), ("c", "3.0"), ("d", "4.0")] {
            set.insert(id, Outcome::Label(label(v))).unwrap();
        }
        set.insert("e", Outcome::Unparseable { raw: "x".into() }).unwrap();
        let r = evaluate(&set, &truths, None).unwrap();
        assert_eq!((r.n_evaluated, r.n_unparseable), (4, 1));
        assert!((r.r_squared.unwrap() - 169.0 / 175.0).abs() < 1e-12);
        assert_eq!(r.mae, Some(0.25));
        assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn undefined_r2_and_unknown_ids() {
        let truths: BTreeMap<String, BinLabel> =
            [("a", "1.0"), ("b", "2.0")].iter().map(|(k, v)| (k.to_string(), label(v))).collect();
        let mut set = PredictionSet::new("const");
        set.insert("a", Outcome::Label(label("5.0"))).unwrap();
        set.insert("b", Outcome::Label(label("5.0"))).unwrap();
        let r = evaluate(&set, &truths, None).unwrap();
        assert_eq!(r.r_squared, None);
        assert_eq!(r.mae, Some(3.5));
        set.insert("zz", Outcome::Label(label("5.0"))).unwrap();
        assert!(matches!(evaluate(&set, &truths, None), Err(EvalError::UnknownId(_))));
    }
}
