use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::geo::GeoPoint;
use crate::io::write_atomic;
use crate::label::BinLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMapRow {
    pub id: String,
    pub point: GeoPoint,
    pub pred: BinLabel,
    pub truth: BinLabel,
}

impl ErrorMapRow {
    /// Exact on the tenths grid.
    pub fn abs_err(&self) -> f64 {
        f64::from(self.pred.tenths().abs_diff(self.truth.tenths())) / 10.0
    }
}

#[derive(Serialize, Deserialize)]
struct Properties {
    id: String,
    pred: BinLabel,
    truth: BinLabel,
    abs_err: f64,
}

#[derive(Serialize, Deserialize)]
struct Geometry {
    #[serde(rename = "type")]
    kind: String,
    coordinates: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct Feature {
    #[serde(rename = "type")]
    kind: String,
    geometry: Geometry,
    properties: Properties,
}

#[derive(Deserialize)]
struct Collection {
    features: Vec<Feature>,
}

/// GeoJSON FeatureCollection with one point feature per row, one feature
/// per line.
pub fn write_geojson(rows: &[ErrorMapRow], mut w: impl Write) -> std::io::Result<()> {
    w.write_all(b"{\"type\":\"FeatureCollection\",\"features\":[\n")?;
    for (i, r) in rows.iter().enumerate() {
        let f = Feature {
            kind: "Feature".into(),
            geometry: Geometry {
                kind: "Point".into(),
                coordinates: [r.point.lon(), r.point.lat()],
            },
            properties: Properties {
                id: r.id.clone(),
                pred: r.pred,
                truth: r.truth,
                abs_err: r.abs_err(),
            },
        };
        serde_json::to_writer(&mut w, &f)?;
        w.write_all(if i + 1 < rows.len() { b",\n" } else { b"\n" })?;
    }
    w.write_all(b"]}\n")
}

pub fn write_error_csv(rows: &[ErrorMapRow], mut w: impl Write) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(&mut w);
    out.write_record(["id", "lat", "lon", "pred", "truth", "abs_err"])?;
    for r in rows {
        out.write_record([
            r.id.clone(),
            r.point.lat().to_string(),
            r.point.lon().to_string(),
            r.pred.to_string(),
            r.truth.to_string(),
            format!("{:.1}", r.abs_err()),
        ])?;
    }
    out.flush()
}

pub fn parse_geojson(text: &str) -> Result<Vec<ErrorMapRow>, EvalError> {
    let c: Collection = serde_json::from_str(text).map_err(|e| EvalError::Format(e.to_string()))?;
    c.features
        .into_iter()
        .map(|f| {
            let [lon, lat] = f.geometry.coordinates;
            Ok(ErrorMapRow {
                id: f.properties.id,
                point: GeoPoint::new(lat, lon).map_err(|e| EvalError::Format(e.to_string()))?,
                pred: f.properties.pred,
                truth: f.properties.truth,
            })
        })
        .collect()
}

/// Writes `path` (GeoJSON) and a CSV twin next to it; returns the CSV path.
pub fn emit_error_map(rows: &[ErrorMapRow], path: &Path) -> Result<PathBuf, EvalError> {
    write_atomic(path, |w| write_geojson(rows, w).map_err(EvalError::from))?;
    let csv_path = path.with_extension("csv");
    write_atomic(&csv_path, |w| write_error_csv(rows, w).map_err(EvalError::from))?;
    Ok(csv_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<ErrorMapRow> {
        [("a", 3, 17), ("b", 99, 0), ("c", 40, 40)]
            .iter()
            .enumerate()
            .map(|(i, &(id, p, t))| ErrorMapRow {
                id: id.into(),
                point: GeoPoint::new(i as f64 + 0.5, -(i as f64) - 0.25).unwrap(),
                pred: BinLabel::from_tenths(p).unwrap(),
                truth: BinLabel::from_tenths(t).unwrap(),
            })
            .collect()
    }

    #[test]
    fn features_round_trip() {
        let mut buf = Vec::new();
        write_geojson(&rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"abs_err\":1.4"));
        assert!(text.contains("\"abs_err\":9.9"));
        let back = parse_geojson(&text).unwrap();
        assert_eq!(back, rows());
    }

    #[test]
    fn csv_twin() {
        let mut buf = Vec::new();
        write_error_csv(&rows(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "a,0.5,-0.25,0.3,1.7,1.4");
        assert_eq!(text.lines().count(), 4);
    }
}
