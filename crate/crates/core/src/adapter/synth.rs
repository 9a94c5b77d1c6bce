//! A seeded synthetic world: a smooth hidden surface, samples drawn from it,
//! and matching place and address data, so the whole pipeline can run offline.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetError, Sample, SourceKind, TaskDataset};
use crate::geo::{haversine_km, GeoPoint};
use crate::mapdata::{nearest_places, AddressBook, PlaceRecord, PlaceSnapshot, Provenance};
use crate::rng::keyed_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl Default for BoundingBox {
    fn default() -> Self {
        Self {
            lat_min: 8.0,
            lat_max: 12.0,
            lon_min: 6.0,
            lon_max: 10.0,
        }
    }
}

impl BoundingBox {
    /// Uniform in latitude and longitude (not in area).
    pub fn random_point(&self, rng: &mut impl Rng) -> GeoPoint {
        GeoPoint::new(
            rng.random_range(self.lat_min..self.lat_max),
            rng.random_range(self.lon_min..self.lon_max),
        )
        .expect("box lies on the globe")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: GeoPoint,
    pub amplitude: f64,
    pub width_km: f64,
}

/// `base + Σ amplitude · exp(-d² / (2 · width²))`, d the great-circle
/// distance to each bump centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub bbox: BoundingBox,
    pub base: f64,
    pub bumps: Vec<Bump>,
}

impl SyntheticWorld {
    pub fn generate(seed: u64, bbox: BoundingBox, n_bumps: usize) -> Self {
        let mut rng = keyed_rng(seed, "synth-world", "");
        let bumps = (0..n_bumps)
            .map(|_| Bump {
                center: bbox.random_point(&mut rng),
                amplitude: rng.random_range(50.0..1000.0),
                width_km: rng.random_range(15.0..80.0),
            })
            .collect();
        Self { bbox, base: 5.0, bumps }
    }

    pub fn value(&self, p: GeoPoint) -> f64 {
        self.base
            + self
                .bumps
                .iter()
                .map(|b| {
                    let d = haversine_km(p, b.center).exact_km() / b.width_km;
                    b.amplitude * (-0.5 * d * d).exp()
                })
                .sum::<f64>()
    }

    /// `n` samples at uniform positions in the box, with ids `syn-00000`...
    /// and raw value equal to the surface. `noise_sd` adds Gaussian
    /// measurement noise to the raw value.
    pub fn dataset(&self, n: usize, seed: u64, task_name: &str, noise_sd: f64) -> Result<TaskDataset, DatasetError> {
        let width = n.max(1).to_string().len().max(5);
        let samples = (0..n)
            .map(|i| {
                let id = format!("syn-{i:0width$}");
                let mut rng = keyed_rng(seed, "synth-sample", &id);
                let point = self.bbox.random_point(&mut rng);
                let mut raw = self.value(point);
                if noise_sd > 0.0 {
                    raw += Normal::new(0.0, noise_sd).expect("positive sd").sample(&mut rng);
                }
                Sample { id, point, raw }
            })
            .collect();
        TaskDataset::new(task_name, samples, SourceKind::ClusterTable)
    }
}

const SYLLABLES: [&str; 24] = [
    "ka", "go", "ro", "man", "chok", "ja", "sa", "ta", "fa", "wu", "ra", "ma", "nyi", "tu", "kun", "ba", "di", "zo",
    "le", "mi", "ya", "do", "ki", "na",
];

fn place_name(rng: &mut impl Rng) -> String {
    let n = rng.random_range(2..=3);
    let mut s: String = (0..n).map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())]).collect();
    let first = s.remove(0).to_ascii_uppercase();
    s.insert(0, first);
    s
}

/// `n` named places scattered over the box (plus a small margin).
pub fn synthetic_snapshot(bbox: &BoundingBox, n: usize, seed: u64) -> PlaceSnapshot {
    let margin = BoundingBox {
        lat_min: bbox.lat_min - 0.5,
        lat_max: bbox.lat_max + 0.5,
        lon_min: bbox.lon_min - 0.5,
        lon_max: bbox.lon_max + 0.5,
    };
    let records = (0..n).filter_map(|i| {
        let mut rng = keyed_rng(seed, "synth-place", &i.to_string());
        let point = margin.random_point(&mut rng);
        let kind = ["place=town", "place=village", "place=hamlet"][rng.random_range(0..3)];
        PlaceRecord::new(&place_name(&mut rng), point, Some(kind.to_string()))
    });
    PlaceSnapshot::new(
        records,
        Provenance {
            source: format!("synthetic seed={seed}"),
            retrieved_at: None,
        },
    )
}

/// An address for every sample: the nearest place, then a district named
/// after the sample's grid square, then a fixed region.
pub fn synthetic_addresses(ds: &TaskDataset, snapshot: &PlaceSnapshot) -> AddressBook {
    let mut book = AddressBook::new();
    for s in &ds.samples {
        let locality = nearest_places(s.point, snapshot, 1, f64::INFINITY)
            .into_iter()
            .next()
            .map(|p| p.name)
            .unwrap_or_else(|| "Unnamed".to_string());
        let district = format!("District {}{}", (s.point.lat() * 2.0).floor(), (s.point.lon() * 2.0).floor());
        book.insert(s.point, &format!("{locality}, {district}, Synthetic Region"));
    }
    book
}
