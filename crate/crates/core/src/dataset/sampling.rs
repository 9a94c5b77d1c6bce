use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{DatasetError, Sample, SourceKind, TaskDataset};
use crate::geo::GeoPoint;
use crate::label::{aggregate_raster_label, GridRaster};
use crate::rng::{indexed_rng, open_unit};

struct Keyed(f64, usize);

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Keyed {}
impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
// Reversed so the heap top is the weakest kept entry: smallest key, then
// largest index.
impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(self.1.cmp(&other.1))
    }
}

/// Weighted sampling without replacement (Efraimidis–Spirakis).
///
/// Each positive weight `w_i` gets key `ln(u_i) / w_i` with `u_i` drawn from
/// the stream keyed by `(seed, i)`; the `n` largest keys win. Returned
/// indices are in descending key order.
pub fn importance_sample_indices(weights: &[f64], n: usize, seed: u64) -> Result<Vec<usize>, DatasetError> {
    let positive = weights.iter().filter(|w| w.is_finite() && **w > 0.0).count();
    if positive < n {
        return Err(DatasetError::InsufficientCells { need: n, got: positive });
    }
    let mut heap: BinaryHeap<Keyed> = BinaryHeap::with_capacity(n + 1);
    for (i, &w) in weights.iter().enumerate() {
        if !(w.is_finite() && w > 0.0) {
            continue;
        }
        let u = open_unit(&mut indexed_rng(seed, "importance", i as u64));
        heap.push(Keyed(u.ln() / w, i));
        if heap.len() > n {
            heap.pop();
        }
    }
    let mut chosen = heap.into_vec();
    chosen.sort();
    Ok(chosen.into_iter().map(|k| k.1).collect())
}

/// Draws `n` distinct cells with probability proportional to cell value and
/// returns their centres with the cell value.
pub fn importance_sample(raster: &GridRaster, n: usize, seed: u64) -> Result<Vec<(GeoPoint, f64)>, DatasetError> {
    let weights: Vec<f64> = (0..raster.cell_count())
        .map(|i| raster.value_at(i).unwrap_or(0.0))
        .collect();
    Ok(importance_sample_indices(&weights, n, seed)?
        .into_iter()
        .map(|i| (raster.cell_center_point(i), weights[i]))
        .collect())
}

/// Samples `n` cells of `weights` and labels each with the window mean of
/// `values` around the cell centre. Ids are `r{row}c{col}` of the weight grid.
pub fn sample_raster_dataset(
    weights: &GridRaster,
    values: &GridRaster,
    n: usize,
    seed: u64,
    task_name: &str,
) -> Result<TaskDataset, DatasetError> {
    let w: Vec<f64> = (0..weights.cell_count())
        .map(|i| weights.value_at(i).unwrap_or(0.0))
        .collect();
    let mut samples = Vec::with_capacity(n);
    for i in importance_sample_indices(&w, n, seed)? {
        let point = weights.cell_center_point(i);
        let raw = aggregate_raster_label(values, point)?;
        samples.push(Sample {
            id: format!("r{}c{}", i / weights.ncols(), i % weights.ncols()),
            point,
            raw,
        });
    }
    TaskDataset::new(task_name, samples, SourceKind::Raster)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_positive_cell() {
        assert_eq!(importance_sample_indices(&[0.0, 3.0, 0.0], 1, 9).unwrap(), vec![1]);
    }

    #[test]
    fn exhaustion_and_shortage() {
        let mut all = importance_sample_indices(&[1.0, 0.0, 2.0, 5.0], 3, 1).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 2, 3]);
        assert!(matches!(
            importance_sample_indices(&[1.0, 0.0], 2, 1),
            Err(DatasetError::InsufficientCells { need: 2, got: 1 })
        ));
    }

    #[test]
    fn deterministic_and_distinct() {
        let w: Vec<f64> = (0..500).map(|i| (i % 7) as f64).collect();
        let a = importance_sample_indices(&w, 100, 42).unwrap();
        assert_eq!(a, importance_sample_indices(&w, 100, 42).unwrap());
        let mut s = a.clone();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), 100);
        assert!(a.iter().all(|&i| w[i] > 0.0));
    }

    #[test]
    fn raster_samples_are_cell_centres() {
        let r = GridRaster::new(2, 1, 0.0, 0.0, 1.0, None, vec![0.0, 4.0]).unwrap();
        let got = importance_sample(&r, 1, 0).unwrap();
        assert_eq!(got[0].0, GeoPoint::new(0.5, 1.5).unwrap());
        assert_eq!(got[0].1, 4.0);
    }
}
