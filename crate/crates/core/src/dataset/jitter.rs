use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Sample, TaskDataset};
use crate::geo::GeoPoint;
use crate::rng::{keyed_rng, open_unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    Urban,
    Rural,
}

impl FromStr for ClusterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "urban" => Ok(ClusterKind::Urban),
            "rural" => Ok(ClusterKind::Rural),
            other => Err(format!("unknown cluster kind {other:?}")),
        }
    }
}

/// Maximum displacement per cluster kind, in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterRadii {
    pub urban_km: f64,
    pub rural_km: f64,
}

impl Default for JitterRadii {
    fn default() -> Self {
        Self {
            urban_km: 2.0,
            rural_km: 10.0,
        }
    }
}

impl JitterRadii {
    pub fn radius_km(&self, kind: ClusterKind) -> f64 {
        match kind {
            ClusterKind::Urban => self.urban_km,
            ClusterKind::Rural => self.rural_km,
        }
    }
}

/// Moves `p` to a uniformly random point of the disc around it whose radius
/// depends on `kind`. The draw is keyed by `(seed, id)`.
pub fn jitter_coordinates(p: GeoPoint, kind: ClusterKind, radii: &JitterRadii, seed: u64, id: &str) -> GeoPoint {
    let radius = radii.radius_km(kind);
    let mut rng = keyed_rng(seed, "jitter", id);
    // sqrt makes the area density uniform.
    let r = radius * open_unit(&mut rng).sqrt();
    let bearing = 360.0 * open_unit(&mut rng);
    p.destination(r, bearing)
}

pub fn jitter_dataset(ds: &TaskDataset, kind: ClusterKind, radii: &JitterRadii, seed: u64) -> TaskDataset {
    TaskDataset {
        task_name: ds.task_name.clone(),
        samples: ds
            .samples
            .iter()
            .map(|s| Sample {
                id: s.id.clone(),
                point: jitter_coordinates(s.point, kind, radii, seed, &s.id),
                raw: s.raw,
            })
            .collect(),
        source_kind: ds.source_kind,
    }
}
