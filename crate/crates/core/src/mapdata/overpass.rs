use std::collections::BTreeMap;

use serde::Deserialize;

use super::snapshot::SnapshotLine;
use super::{excerpt, ClientConfig, HttpClient, KvCache, MapError, PlaceRecord};
use crate::geo::GeoPoint;
use crate::numfmt;

pub const OVERPASS_URL_ENV: &str = "GEOLLM_OVERPASS_URL";
pub const DEFAULT_OVERPASS_URL: &str = "https://overpass-api.de";

/// Which OSM nodes count as places: nodes carrying `key` (optionally
/// restricted to `values`) and a `name` tag.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaceFilter {
    pub key: String,
    pub values: Option<Vec<String>>,
}

impl Default for PlaceFilter {
    fn default() -> Self {
        Self {
            key: "place".into(),
            values: None,
        }
    }
}

/// Overpass QL for named nodes within `radius_km` of `p`.
pub fn build_overpass_query(p: GeoPoint, radius_km: f64, filter: &PlaceFilter) -> String {
    let radius_m = numfmt::fixed(radius_km * 1000.0, 0);
    let tag = match &filter.values {
        Some(values) if !values.is_empty() => {
            format!("[\"{}\"~\"^({})$\"]", filter.key, values.join("|"))
        }
        _ => format!("[\"{}\"]", filter.key),
    };
    format!(
        "[out:json][timeout:25];node(around:{radius_m},{},{}){tag}[\"name\"];out body;",
        numfmt::fixed(p.lat(), 5),
        numfmt::fixed(p.lon(), 5),
    )
}

#[derive(Deserialize)]
struct OverpassResponse {
    elements: Vec<OverpassElement>,
}

#[derive(Deserialize)]
struct OverpassElement {
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    lat: Option<f64>,
    #[serde(default)]
    lon: Option<f64>,
    #[serde(default)]
    tags: BTreeMap<String, String>,
}

/// Extracts named nodes from an Overpass JSON payload. Non-node elements,
/// unnamed nodes and nodes without the filter key are skipped.
pub fn parse_overpass_response(body: &str, filter: &PlaceFilter) -> Result<Vec<PlaceRecord>, MapError> {
    let response: OverpassResponse = serde_json::from_str(body).map_err(|e| {
        MapError::unavailable("overpass", format!("malformed payload ({e}): {}", excerpt(body, 200)))
    })?;
    let mut out = Vec::new();
    for el in response.elements {
        if el.kind != "node" {
            continue;
        }
        let (Some(lat), Some(lon)) = (el.lat, el.lon) else {
            continue;
        };
        let Some(name) = el.tags.get("name") else {
            continue;
        };
        let Some(value) = el.tags.get(&filter.key) else {
            continue;
        };
        if let Some(values) = &filter.values {
            if !values.iter().any(|v| v == value) {
                continue;
            }
        }
        let Ok(point) = GeoPoint::new(lat, lon) else {
            continue;
        };
        if let Some(record) = PlaceRecord::new(name, point, Some(format!("{}={value}", filter.key))) {
            out.push(record);
        }
    }
    Ok(out)
}

/// Live client for the Overpass interpreter endpoint.
#[derive(Debug)]
pub struct OverpassClient {
    http: HttpClient,
    filter: PlaceFilter,
}

impl OverpassClient {
    pub fn new(config: ClientConfig, filter: PlaceFilter) -> Self {
        Self {
            http: HttpClient::new("overpass", config),
            filter,
        }
    }

    /// Base URL from `GEOLLM_OVERPASS_URL`, falling back to the public server.
    pub fn from_env(filter: PlaceFilter) -> Self {
        Self::new(
            ClientConfig::from_env(OVERPASS_URL_ENV, DEFAULT_OVERPASS_URL),
            filter,
        )
    }

    pub fn filter(&self) -> &PlaceFilter {
        &self.filter
    }

    fn query(&self, p: GeoPoint, radius_km: f64) -> Result<Vec<PlaceRecord>, MapError> {
        let q = build_overpass_query(p, radius_km, &self.filter);
        let body = self.http.post_form("/api/interpreter", &[("data", &q)])?;
        parse_overpass_response(&body, &self.filter)
    }
}

/// Named places within `radius_km` of `p`, cached under
/// `ovp:{lat5}:{lon5}:{radius}`. A non-positive radius returns nothing
/// without touching the network.
pub fn fetch_overpass_places(
    p: GeoPoint,
    client: &OverpassClient,
    radius_km: f64,
    cache: &KvCache,
) -> Result<Vec<PlaceRecord>, MapError> {
    if radius_km <= 0.0 {
        return Ok(Vec::new());
    }
    let key = format!("ovp:{}:{radius_km}", p.key5());
    if let Some(hit) = cache.get(&key) {
        let lines: Vec<SnapshotLine> = serde_json::from_str(&hit).map_err(|e| MapError::InvalidRecord {
            line: 0,
            reason: format!("corrupt cache entry {key}: {e}"),
        })?;
        return lines
            .into_iter()
            .map(|l| l.into_record(0))
            .collect();
    }
    let records = client.query(p, radius_km)?;
    let lines: Vec<SnapshotLine> = records.iter().map(SnapshotLine::from).collect();
    cache.put(&key, &serde_json::to_string(&lines).expect("snapshot lines serialize"))?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_text() {
        let p = GeoPoint::new(9.63708, 8.48625).unwrap();
        assert_eq!(
            build_overpass_query(p, 100.0, &PlaceFilter::default()),
            "[out:json][timeout:25];node(around:100000,9.63708,8.48625)[\"place\"][\"name\"];out body;"
        );
        let filter = PlaceFilter {
            key: "place".into(),
            values: Some(vec!["town".into(), "village".into()]),
        };
        assert_eq!(
            build_overpass_query(p, 2.5, &filter),
            "[out:json][timeout:25];node(around:2500,9.63708,8.48625)[\"place\"~\"^(town|village)$\"][\"name\"];out body;"
        );
    }

    #[test]
    fn skips_unusable_elements() {
        let body = r#"{"elements":[
            {"type":"node","id":1,"lat":9.67,"lon":8.51,"tags":{"name":"Manchok","place":"town"}},
            {"type":"node","id":2,"lat":9.6,"lon":8.4,"tags":{"place":"village"}},
            {"type":"way","id":3,"tags":{"name":"Road","place":"square"}},
            {"type":"node","id":4,"lat":9.5,"lon":8.3,"tags":{"name":"Shop","shop":"yes"}},
            {"type":"node","id":5,"lat":95.0,"lon":8.3,"tags":{"name":"Bad","place":"town"}}
        ]}"#;
        let got = parse_overpass_response(body, &PlaceFilter::default()).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].name(), "Manchok");
        assert_eq!(got[0].kind(), Some("place=town"));
    }

    #[test]
    fn malformed_payload_carries_excerpt() {
        let err = parse_overpass_response("rate_limited <html>", &PlaceFilter::default()).unwrap_err();
        match err {
            MapError::ProviderUnavailable { reason, .. } => assert!(reason.contains("rate_limited")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_radius_is_offline_and_empty() {
        let client = OverpassClient::new(ClientConfig::new("http://127.0.0.1:9"), PlaceFilter::default());
        let p = GeoPoint::new(0.0, 0.0).unwrap();
        assert!(fetch_overpass_places(p, &client, 0.0, &KvCache::in_memory()).unwrap().is_empty());
    }
}
