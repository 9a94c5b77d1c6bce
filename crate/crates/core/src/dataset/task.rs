use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{zip_centroid, DatasetError};
use crate::geo::GeoPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Raster,
    ClusterTable,
    ZipCentroid,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Raster => "raster",
            SourceKind::ClusterTable => "cluster-table",
            SourceKind::ZipCentroid => "zip-centroid",
        })
    }
}

impl FromStr for SourceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raster" => Ok(SourceKind::Raster),
            "cluster-table" => Ok(SourceKind::ClusterTable),
            "zip-centroid" => Ok(SourceKind::ZipCentroid),
            other => Err(format!("unknown source kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub point: GeoPoint,
    pub raw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub task_name: String,
    pub samples: Vec<Sample>,
    pub source_kind: SourceKind,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    id: String,
    lat: f64,
    lon: f64,
    value: f64,
}

#[derive(Deserialize)]
struct ZipLine {
    id: String,
    value: f64,
    /// `[lon, lat]` pairs, GeoJSON order.
    boundary: Vec<[f64; 2]>,
}

impl TaskDataset {
    /// Validates ids, points and values.
    pub fn new(task_name: &str, samples: Vec<Sample>, source_kind: SourceKind) -> Result<Self, DatasetError> {
        let mut seen = HashSet::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            if s.id.is_empty() {
                return Err(DatasetError::InvalidRecord {
                    line: i + 1,
                    reason: "empty id".into(),
                });
            }
            if !s.raw.is_finite() {
                return Err(DatasetError::InvalidRecord {
                    line: i + 1,
                    reason: format!("non-finite value for {}", s.id),
                });
            }
            if !seen.insert(s.id.as_str()) {
                return Err(DatasetError::DuplicateId(s.id.clone()));
            }
        }
        Ok(Self {
            task_name: task_name.to_string(),
            samples,
            source_kind,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Sample> {
        self.samples.iter().find(|s| s.id == id)
    }

    /// Keeps the first sample at each 5-decimal coordinate.
    pub fn dedup_coordinates(&self) -> (TaskDataset, usize) {
        let mut seen = HashSet::new();
        let kept: Vec<Sample> = self
            .samples
            .iter()
            .filter(|s| seen.insert(s.point.key5()))
            .cloned()
            .collect();
        let dropped = self.samples.len() - kept.len();
        (
            TaskDataset {
                task_name: self.task_name.clone(),
                samples: kept,
                source_kind: self.source_kind,
            },
            dropped,
        )
    }

    /// Reads `id,lat,lon,value` CSV.
    pub fn from_csv(reader: impl Read, task_name: &str, source_kind: SourceKind) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut samples = Vec::new();
        for (i, row) in rdr.deserialize::<CsvRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| DatasetError::InvalidRecord {
                line,
                reason: e.to_string(),
            })?;
            let point = GeoPoint::new(row.lat, row.lon).map_err(|e| DatasetError::InvalidRecord {
                line,
                reason: e.to_string(),
            })?;
            samples.push(Sample {
                id: row.id,
                point,
                raw: row.value,
            });
        }
        Self::new(task_name, samples, source_kind)
    }

    pub fn load_csv(path: &Path, task_name: &str, source_kind: SourceKind) -> Result<Self, DatasetError> {
        Self::from_csv(std::fs::File::open(path)?, task_name, source_kind)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.samples {
            w.serialize(CsvRow {
                id: s.id.clone(),
                lat: s.point.lat(),
                lon: s.point.lon(),
                value: s.raw,
            })
            .map_err(|e| DatasetError::Io(std::io::Error::other(e)))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads JSONL lines `{"id", "value", "boundary": [[lon, lat], ...]}` and
    /// places each sample at its polygon centroid.
    pub fn from_zip_jsonl(reader: impl Read, task_name: &str) -> Result<Self, DatasetError> {
        let text = {
            let mut s = String::new();
            let mut reader = reader;
            reader.read_to_string(&mut s)?;
            s
        };
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| DatasetError::InvalidRecord { line: i + 1, reason };
            let z: ZipLine = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let boundary = z
                .boundary
                .iter()
                .map(|[lon, lat]| GeoPoint::new(*lat, *lon))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(e.to_string()))?;
            let point = zip_centroid(&boundary).map_err(|e| bad(format!("{}: {e}", z.id)))?;
            samples.push(Sample {
                id: z.id,
                point,
                raw: z.value,
            });
        }
        Self::new(task_name, samples, SourceKind::ZipCentroid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let csv = "id,lat,lon,value\na,1.5,2.25,0.1\nb,-3.0,179.5,1e6\n";
        let ds = TaskDataset::from_csv(csv.as_bytes(), "T", SourceKind::ClusterTable).unwrap();
        let mut out = Vec::new();
        ds.write_csv(&mut out).unwrap();
        let back = TaskDataset::from_csv(out.as_slice(), "T", SourceKind::ClusterTable).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn rejects_bad_rows() {
        let dup = "id,lat,lon,value\na,1,2,3\na,1,2,3\n";
        assert!(matches!(
            TaskDataset::from_csv(dup.as_bytes(), "T", SourceKind::Raster),
            Err(DatasetError::DuplicateId(_))
        ));
        let lat = "id,lat,lon,value\na,91,2,3\n";
        assert!(matches!(
            TaskDataset::from_csv(lat.as_bytes(), "T", SourceKind::Raster),
            Err(DatasetError::InvalidRecord { line: 2, .. })
        ));
        let nan = "id,lat,lon,value\na,1,2,NaN\n";
        assert!(TaskDataset::from_csv(nan.as_bytes(), "T", SourceKind::Raster).is_err());
    }

    #[test]
    fn zip_lines_use_centroids() {
        let text = r#"{"id":"10001","value":5.0,"boundary":[[0,0],[2,0],[2,2],[0,2]]}"#;
        let ds = TaskDataset::from_zip_jsonl(text.as_bytes(), "Home Value").unwrap();
        assert_eq!(ds.samples[0].point, GeoPoint::new(1.0, 1.0).unwrap());
        assert_eq!(ds.source_kind, SourceKind::ZipCentroid);
    }

    #[test]
    fn dedup_keeps_first() {
        let csv = "id,lat,lon,value\na,1,2,3\nb,1.000001,2,4\nc,5,5,5\n";
        let ds = TaskDataset::from_csv(csv.as_bytes(), "T", SourceKind::ClusterTable).unwrap();
        let (d, dropped) = ds.dedup_coordinates();
        assert_eq!(dropped, 1);
        assert_eq!(d.samples.iter().map(|s| s.id.as_str()).collect::<Vec<_>>(), ["a", "c"]);
    }
}
