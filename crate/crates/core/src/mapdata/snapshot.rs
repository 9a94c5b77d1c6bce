use std::cmp::Ordering;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::MapError;
use crate::geo::{classify_direction, initial_bearing_deg, CompassDirection, DistanceKm, GeoPoint};
use crate::spatial::SpatialIndex;

pub const DEFAULT_LIMIT: usize = 10;
pub const DEFAULT_RADIUS_KM: f64 = 100.0;

/// A named map entity.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceRecord {
    name: String,
    point: GeoPoint,
    kind: Option<String>,
}

impl PlaceRecord {
    /// The name is trimmed; an empty name is rejected.
    pub fn new(name: &str, point: GeoPoint, kind: Option<String>) -> Option<Self> {
        let name = name.trim();
        if name.is_empty() {
            return None;
        }
        Some(Self {
            name: name.to_string(),
            point,
            kind: kind.filter(|k| !k.is_empty()),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn point(&self) -> GeoPoint {
        self.point
    }

    pub fn kind(&self) -> Option<&str> {
        self.kind.as_deref()
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.name
            .cmp(&other.name)
            .then(self.point.lat().total_cmp(&other.point.lat()))
            .then(self.point.lon().total_cmp(&other.point.lon()))
            .then(self.kind.cmp(&other.kind))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct SnapshotLine {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

impl From<&PlaceRecord> for SnapshotLine {
    fn from(r: &PlaceRecord) -> Self {
        SnapshotLine {
            name: r.name.clone(),
            lat: r.point.lat(),
            lon: r.point.lon(),
            kind: r.kind.clone(),
        }
    }
}

impl SnapshotLine {
    pub(crate) fn into_record(self, line: usize) -> Result<PlaceRecord, MapError> {
        let point = GeoPoint::new(self.lat, self.lon).map_err(|e| MapError::InvalidRecord {
            line,
            reason: e.to_string(),
        })?;
        PlaceRecord::new(&self.name, point, self.kind).ok_or(MapError::InvalidRecord {
            line,
            reason: "empty place name".into(),
        })
    }
}

/// Where a snapshot came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved_at: Option<String>,
}

/// One entry of the nearby-places block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearbyPlace {
    pub name: String,
    pub distance: DistanceKm,
    pub direction: CompassDirection,
}

impl NearbyPlace {
    /// `"0.6 km South-West: Theater District"`
    pub fn render(&self) -> String {
        format!("{} km {}: {}", self.distance, self.direction, self.name)
    }
}

/// An immutable, spatially indexed set of places.
#[derive(Debug, Clone)]
pub struct PlaceSnapshot {
    records: Vec<PlaceRecord>,
    provenance: Provenance,
    index: SpatialIndex,
}

impl PlaceSnapshot {
    /// Sorts into canonical order and drops duplicate `(name, point)` pairs.
    pub fn new(records: impl IntoIterator<Item = PlaceRecord>, provenance: Provenance) -> Self {
        let mut records: Vec<PlaceRecord> = records.into_iter().collect();
        records.sort_by(PlaceRecord::canonical_cmp);
        records.dedup_by(|b, a| a.name == b.name && a.point == b.point);
        let index = SpatialIndex::build(records.iter().map(|r| r.point).collect());
        Self {
            records,
            provenance,
            index,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Provenance::default())
    }

    pub fn records(&self) -> &[PlaceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// A new snapshot containing both record sets.
    pub fn extended(&self, more: impl IntoIterator<Item = PlaceRecord>) -> Self {
        Self::new(
            self.records.iter().cloned().chain(more),
            self.provenance.clone(),
        )
    }

    pub fn from_reader(reader: impl Read, provenance: Provenance) -> Result<Self, MapError> {
        let mut records = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: SnapshotLine =
                serde_json::from_str(&line).map_err(|e| MapError::InvalidRecord {
                    line: i + 1,
                    reason: e.to_string(),
                })?;
            records.push(parsed.into_record(i + 1)?);
        }
        Ok(Self::new(records, provenance))
    }

    /// Reads a JSONL snapshot and its optional `.provenance.json` sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MapError> {
        let path = path.as_ref();
        let sidecar = provenance_path(path);
        let provenance = if sidecar.exists() {
            let text = std::fs::read_to_string(&sidecar)?;
            serde_json::from_str(&text).map_err(|e| MapError::InvalidRecord {
                line: 0,
                reason: format!("{}: {e}", sidecar.display()),
            })?
        } else {
            Provenance {
                source: path.display().to_string(),
                retrieved_at: None,
            }
        };
        Self::from_reader(File::open(path)?, provenance)
    }

    pub fn write_to(&self, writer: impl Write) -> Result<(), MapError> {
        let mut w = BufWriter::new(writer);
        for r in &self.records {
            let line = serde_json::to_string(&SnapshotLine::from(r))
                .expect("snapshot lines always serialize");
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the JSONL file and the provenance sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MapError> {
        let path = path.as_ref();
        crate::io::write_atomic(path, |w| self.write_to(w))?;
        let sidecar = serde_json::to_string_pretty(&self.provenance).expect("provenance serializes");
        crate::io::write_atomic(&provenance_path(path), |w| {
            w.write_all(sidecar.as_bytes())?;
            Ok::<_, MapError>(())
        })?;
        Ok(())
    }
}

fn provenance_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

/// The `limit` closest places within `radius_km` of `p`, nearest first.
///
/// Equal distances are ordered by name, then longitude, then latitude. A place
/// sitting exactly on `p` is skipped.
pub fn nearest_places(
    p: GeoPoint,
    snapshot: &PlaceSnapshot,
    limit: usize,
    radius_km: f64,
) -> Vec<NearbyPlace> {
    let records = &snapshot.records;
    let exclude = |i: usize| records[i].point == p;
    let ranked = snapshot.index.nearest(p, limit, radius_km, &exclude, |a, b| {
        let (ra, rb) = (&records[a], &records[b]);
        ra.name
            .cmp(&rb.name)
            .then(ra.point.lon().total_cmp(&rb.point.lon()))
            .then(ra.point.lat().total_cmp(&rb.point.lat()))
    });
    ranked
        .into_iter()
        .map(|(i, km)| {
            let record = &records[i];
            let bearing = initial_bearing_deg(p, record.point)
                .expect("coincident places are excluded");
            NearbyPlace {
                name: record.name.clone(),
                distance: DistanceKm::new(km),
                direction: classify_direction(bearing),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(name: &str, lat: f64, lon: f64) -> PlaceRecord {
        PlaceRecord::new(name, GeoPoint::new(lat, lon).unwrap(), None).unwrap()
    }

    #[test]
    fn empty_snapshot_yields_nothing() {
        let p = GeoPoint::new(1.0, 1.0).unwrap();
        assert!(nearest_places(p, &PlaceSnapshot::empty(), 10, 100.0).is_empty());
    }

    #[test]
    fn blank_names_rejected_and_trimmed() {
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        assert!(PlaceRecord::new("   ", p, None).is_none());
        assert_eq!(PlaceRecord::new("  Kagoro ", p, None).unwrap().name(), "Kagoro");
    }

    #[test]
    fn duplicates_are_removed() {
        let s = PlaceSnapshot::new(
            vec![rec("A", 1.0, 1.0), rec("A", 1.0, 1.0), rec("A", 1.0, 1.1)],
            Provenance::default(),
        );
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn radius_limit_and_self_exclusion() {
        let origin = GeoPoint::new(0.0, 0.0).unwrap();
        let s = PlaceSnapshot::new(
            vec![
                rec("Here", 0.0, 0.0),
                rec("Near", 0.0, 0.001),
                rec("Mid", 0.5, 0.0),
                rec("Far", 2.0, 0.0),
            ],
            Provenance::default(),
        );
        let got = nearest_places(origin, &s, 10, 100.0);
        let names: Vec<_> = got.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["Near", "Mid"]);
        assert_eq!(got[0].render(), "0.1 km East: Near");
        assert_eq!(got[1].direction, CompassDirection::North);
        assert_eq!(nearest_places(origin, &s, 1, 100.0).len(), 1);
    }

    #[test]
    fn equidistant_places_ordered_by_name_then_lon() {
        let origin = GeoPoint::new(0.0, 0.0).unwrap();
        let s = PlaceSnapshot::new(
            vec![rec("B", 0.0, 0.1), rec("A", 0.0, -0.1), rec("B", 0.0, -0.1)],
            Provenance::default(),
        );
        let got = nearest_places(origin, &s, 10, 100.0);
        let dirs: Vec<_> = got.iter().map(|n| (n.name.as_str(), n.direction)).collect();
        assert_eq!(
            dirs,
            [
                ("A", CompassDirection::West),
                ("B", CompassDirection::West),
                ("B", CompassDirection::East)
            ]
        );
    }

    #[test]
    fn jsonl_round_trip() {
        let s = PlaceSnapshot::new(
            vec![
                rec("Kagoro", 9.6, 8.39),
                PlaceRecord::new("Manchok", GeoPoint::new(9.67, 8.51).unwrap(), Some("place=town".into())).unwrap(),
            ],
            Provenance::default(),
        );
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "{\"name\":\"Kagoro\",\"lat\":9.6,\"lon\":8.39}\n{\"name\":\"Manchok\",\"lat\":9.67,\"lon\":8.51,\"kind\":\"place=town\"}\n"
        );
        let back = PlaceSnapshot::from_reader(buf.as_slice(), Provenance::default()).unwrap();
        assert_eq!(back.records(), s.records());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "{\"name\":\"A\",\"lat\":1,\"lon\":1}\n{\"name\":\"B\",\"lat\":100,\"lon\":1}\n";
        match PlaceSnapshot::from_reader(text.as_bytes(), Provenance::default()) {
            Err(MapError::InvalidRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
