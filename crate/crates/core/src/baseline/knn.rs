use super::BaselineError;
use crate::geo::GeoPoint;
use crate::label::BinLabel;
use crate::spatial::SpatialIndex;

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub id: String,
    pub point: GeoPoint,
    pub label: BinLabel,
}

/// Mean of the labels of the `k` geodesically nearest training points.
#[derive(Debug, Clone)]
pub struct KnnRegressor {
    train: Vec<LabeledPoint>,
    index: SpatialIndex,
    k: usize,
}

impl KnnRegressor {
    pub fn fit(train: Vec<LabeledPoint>, k: usize) -> Result<Self, BaselineError> {
        if k == 0 || train.len() < k {
            return Err(BaselineError::InsufficientTrainingData {
                need: k.max(1),
                got: train.len(),
            });
        }
        let index = SpatialIndex::build(train.iter().map(|t| t.point).collect());
        Ok(Self { train, index, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices of the neighbours, nearest first; equal distances order by
    /// longitude, latitude, then id.
    pub fn neighbours(&self, query: GeoPoint) -> Vec<usize> {
        let train = &self.train;
        self.index
            .nearest(query, self.k, f64::INFINITY, &|_| false, |a, b| {
                let (ta, tb) = (&train[a], &train[b]);
                ta.point
                    .lon()
                    .total_cmp(&tb.point.lon())
                    .then(ta.point.lat().total_cmp(&tb.point.lat()))
                    .then_with(|| ta.id.cmp(&tb.id))
            })
            .into_iter()
            .map(|(i, _)| i)
            .collect()
    }

    /// Mean in tenths, rounded half up to the nearest tenth. Integer
    /// arithmetic keeps the rounding exact.
    pub fn predict(&self, query: GeoPoint) -> BinLabel {
        let idx = self.neighbours(query);
        let sum: usize = idx.iter().map(|&i| usize::from(self.train[i].label.tenths())).sum();
        let k = idx.len();
        let tenths = (2 * sum + k) / (2 * k);
        BinLabel::from_tenths(tenths as u8).expect("mean of labels stays on the scale")
    }
}

pub fn knn_predict(train: &[LabeledPoint], query: GeoPoint, k: usize) -> Result<BinLabel, BaselineError> {
    Ok(KnnRegressor::fit(train.to_vec(), k)?.predict(query))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(id: &str, lat: f64, lon: f64, tenths: u8) -> LabeledPoint {
        LabeledPoint {
            id: id.into(),
            point: GeoPoint::new(lat, lon).unwrap(),
            label: BinLabel::from_tenths(tenths).unwrap(),
        }
    }

    #[test]
    fn coincident_query_k1() {
        let train = vec![lp("a", 0.0, 0.0, 12), lp("b", 1.0, 1.0, 55)];
        assert_eq!(knn_predict(&train, GeoPoint::new(1.0, 1.0).unwrap(), 1).unwrap().tenths(), 55);
    }

    #[test]
    fn arithmetic_mean() {
        let train: Vec<_> = (1..=5).map(|i| lp(&i.to_string(), i as f64 * 0.1, 0.0, i * 10)).collect();
        assert_eq!(knn_predict(&train, GeoPoint::new(0.0, 0.0).unwrap(), 5).unwrap().to_string(), "3.0");
    }

    #[test]
    fn half_tenths_round_up() {
        let train = vec![lp("a", 0.0, 0.1, 10), lp("b", 0.0, 0.2, 11)];
        assert_eq!(knn_predict(&train, GeoPoint::new(0.0, 0.0).unwrap(), 2).unwrap().tenths(), 11);
    }

    #[test]
    fn too_few() {
        assert!(matches!(
            knn_predict(&[lp("a", 0.0, 0.0, 1)], GeoPoint::new(0.0, 0.0).unwrap(), 5),
            Err(BaselineError::InsufficientTrainingData { need: 5, got: 1 })
        ));
    }
}
