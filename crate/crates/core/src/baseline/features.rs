use crate::geo::GeoPoint;
use crate::mapdata::NearbyPlace;
use crate::prompt::ParsedPrompt;

pub const NEARBY_SLOTS: usize = 10;
/// lat, lon, then per slot distance plus 8-way one-hot, then one mask bit per slot.
pub const BASE_FEATURE_WIDTH: usize = 2 + NEARBY_SLOTS * 9 + NEARBY_SLOTS;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Builds features from a point and its nearby places (nearest first).
    /// Places beyond the tenth are ignored; empty slots stay zero with the
    /// mask bit clear.
    pub fn from_parts(point: GeoPoint, nearby: &[NearbyPlace]) -> Self {
        Self::build(
            point,
            nearby
                .iter()
                .map(|p| (p.distance.exact_km(), p.direction.index())),
        )
    }

    /// Same layout from a parsed prompt; distances are the printed one-decimal
    /// values. Missing coordinates become (0, 0).
    pub fn from_parsed(parsed: &ParsedPrompt) -> Self {
        let point = parsed
            .coordinates
            .unwrap_or_else(|| GeoPoint::new(0.0, 0.0).expect("origin is valid"));
        let nearby = parsed.nearby.as_deref().unwrap_or(&[]);
        Self::build(point, nearby.iter().map(|p| (p.distance_km(), p.direction.index())))
    }

    fn build(point: GeoPoint, slots: impl Iterator<Item = (f64, usize)>) -> Self {
        let mut v = vec![0.0; BASE_FEATURE_WIDTH];
        v[0] = point.lat();
        v[1] = point.lon();
        let mask_base = 2 + NEARBY_SLOTS * 9;
        for (slot, (km, dir)) in slots.take(NEARBY_SLOTS).enumerate() {
            let base = 2 + slot * 9;
            v[base] = km;
            v[base + 1 + dir] = 1.0;
            v[mask_base + slot] = 1.0;
        }
        Self(v)
    }

    pub fn with_embedding(mut self, embedding: &[f64]) -> Self {
        self.0.extend_from_slice(embedding);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{CompassDirection, DistanceKm};

    #[test]
    fn layout() {
        assert_eq!(BASE_FEATURE_WIDTH, 102);
        let p = GeoPoint::new(1.0, 2.0).unwrap();
        let nearby = vec![
            NearbyPlace {
                name: "A".into(),
                distance: DistanceKm::new(0.55),
                direction: CompassDirection::East,
            },
            NearbyPlace {
                name: "B".into(),
                distance: DistanceKm::new(3.0),
                direction: CompassDirection::NorthWest,
            },
        ];
        let f = FeatureVector::from_parts(p, &nearby);
        let v = f.values();
        assert_eq!(v.len(), 102);
        assert_eq!(&v[..2], &[1.0, 2.0]);
        assert_eq!(v[2], 0.55);
        assert_eq!(v[3 + 2], 1.0);
        assert_eq!(v[11], 3.0);
        assert_eq!(v[12 + 7], 1.0);
        assert_eq!(&v[92..], &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(v[20..92].iter().all(|&x| x == 0.0));
        assert_eq!(f.with_embedding(&[7.0, 8.0]).width(), 104);
    }
}
