use super::EvalError;
use crate::stats::compensated_sum;

fn check_pairs(preds: &[f64], truths: &[f64], need: usize) -> Result<(), EvalError> {
    if preds.len() != truths.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            truths: truths.len(),
        });
    }
    if preds.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if preds.len() < need {
        return Err(EvalError::TooFewPairs {
            need,
            got: preds.len(),
        });
    }
    Ok(())
}

/// Squared sample Pearson correlation, computed two-pass with compensated
/// sums. Either side having zero variance is an error rather than 0.
pub fn pearson_r2(preds: &[f64], truths: &[f64]) -> Result<f64, EvalError> {
    check_pairs(preds, truths, 2)?;
    let n = preds.len() as f64;
    let mx = compensated_sum(preds.iter().copied()) / n;
    let my = compensated_sum(truths.iter().copied()) / n;
    let sxx = compensated_sum(preds.iter().map(|x| (x - mx) * (x - mx)));
    let syy = compensated_sum(truths.iter().map(|y| (y - my) * (y - my)));
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::ZeroVariance);
    }
    let sxy = compensated_sum(preds.iter().zip(truths).map(|(x, y)| (x - mx) * (y - my)));
    Ok(((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0))
}

pub fn mae(preds: &[f64], truths: &[f64]) -> Result<f64, EvalError> {
    check_pairs(preds, truths, 1)?;
    Ok(compensated_sum(preds.iter().zip(truths).map(|(p, t)| (p - t).abs())) / preds.len() as f64)
}

/// Median of `values` (mean of the middle two for even counts).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { v[m - 1] + (v[m] - v[m - 1]) / 2.0 })
}

/// MAE over pairs whose truth is strictly above the median truth, and over
/// those at or below it. A side with no pairs is `None`.
pub fn median_split_bias(preds: &[f64], truths: &[f64]) -> Result<(Option<f64>, Option<f64>), EvalError> {
    check_pairs(preds, truths, 4)?;
    let med = median(truths).expect("non-empty");
    let (mut above, mut below) = ((Vec::new(), Vec::new()), (Vec::new(), Vec::new()));
    for (&p, &t) in preds.iter().zip(truths) {
        let side = if t > med { &mut above } else { &mut below };
        side.0.push(p);
        side.1.push(t);
    }
    let side_mae = |s: &(Vec<f64>, Vec<f64>)| if s.0.is_empty() { None } else { mae(&s.0, &s.1).ok() };
    Ok((side_mae(&above), side_mae(&below)))
}
