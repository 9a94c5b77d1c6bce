//! Addresses and nearby named places for a coordinate.
//!
//! Offline snapshots ([`PlaceSnapshot`], [`AddressBook`]) are the normal path;
//! the live [`NominatimClient`] and [`OverpassClient`] exist to build those
//! snapshots and share a rate-limited HTTP layer and an on-disk [`KvCache`].

mod address;
mod cache;
mod http;
mod nominatim;
mod overpass;
mod snapshot;

pub use address::{reverse_geocode, AddressBook, AddressProvider, AddressRecord};
pub use cache::KvCache;
pub use http::{ClientConfig, HttpClient};
pub use nominatim::{NominatimClient, DEFAULT_NOMINATIM_URL, NOMINATIM_URL_ENV};
pub use overpass::{
    build_overpass_query, fetch_overpass_places, parse_overpass_response, OverpassClient, PlaceFilter,
    DEFAULT_OVERPASS_URL, OVERPASS_URL_ENV,
};
pub use snapshot::{
    nearest_places, NearbyPlace, PlaceRecord, PlaceSnapshot, Provenance, DEFAULT_LIMIT, DEFAULT_RADIUS_KM,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("{provider} unavailable: {reason}")]
    ProviderUnavailable { provider: String, reason: String },
    #[error("no address found for {0}")]
    NoAddressFound(String),
    #[error("quota exceeded (retry after {retry_after_secs:?} s)")]
    QuotaExceeded { retry_after_secs: Option<u64> },
    #[error("invalid record at line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl MapError {
    pub(crate) fn unavailable(provider: &str, reason: impl Into<String>) -> Self {
        MapError::ProviderUnavailable {
            provider: provider.to_string(),
            reason: reason.into(),
        }
    }
}

/// First `max` characters of a payload, for error messages.
pub(crate) fn excerpt(payload: &str, max: usize) -> String {
    let mut out: String = payload.chars().take(max).collect();
    if payload.chars().count() > max {
        out.push('…');
    }
    out
}
