use serde_json::Value;

use super::{excerpt, AddressProvider, AddressRecord, ClientConfig, HttpClient, MapError};
use crate::geo::GeoPoint;
use crate::numfmt;

pub const NOMINATIM_URL_ENV: &str = "GEOLLM_NOMINATIM_URL";
pub const DEFAULT_NOMINATIM_URL: &str = "https://nominatim.openstreetmap.org";

/// Live reverse geocoder speaking the Nominatim `/reverse` API.
#[derive(Debug)]
pub struct NominatimClient {
    http: HttpClient,
}

impl NominatimClient {
    pub fn new(config: ClientConfig) -> Self {
        Self {
            http: HttpClient::new("nominatim", config),
        }
    }

    /// Base URL from `GEOLLM_NOMINATIM_URL`, falling back to the public server.
    pub fn from_env() -> Self {
        Self::new(ClientConfig::from_env(NOMINATIM_URL_ENV, DEFAULT_NOMINATIM_URL))
    }

    pub fn parse_response(p: GeoPoint, body: &str) -> Result<AddressRecord, MapError> {
        let value: Value = serde_json::from_str(body).map_err(|e| {
            MapError::unavailable("nominatim", format!("{e}: {}", excerpt(body, 200)))
        })?;
        if value.get("error").is_some() {
            return Err(MapError::NoAddressFound(p.key5()));
        }
        match value.get("display_name").and_then(Value::as_str) {
            Some(name) => AddressRecord::new(name, p),
            None => Err(MapError::unavailable(
                "nominatim",
                format!("response without display_name: {}", excerpt(body, 200)),
            )),
        }
    }
}

impl AddressProvider for NominatimClient {
    fn name(&self) -> &str {
        "nominatim"
    }

    fn reverse(&self, p: GeoPoint) -> Result<AddressRecord, MapError> {
        let lat = numfmt::fixed(p.lat(), 5);
        let lon = numfmt::fixed(p.lon(), 5);
        let body = self.http.get(
            "/reverse",
            &[
                ("lat", &lat),
                ("lon", &lon),
                ("format", "jsonv2"),
                ("zoom", "18"),
            ],
        )?;
        Self::parse_response(p, &body)
    }
}
