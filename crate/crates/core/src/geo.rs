//! Spherical geodesy: coordinates, great-circle distance, bearings and the
//! eight-way compass used in prompt text.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt;

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Kilometres per degree of arc on the sphere.
pub const KM_PER_DEGREE: f64 = EARTH_RADIUS_KM * std::f64::consts::PI / 180.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    InvalidLatitude(f64),
    #[error("longitude {0} is not finite")]
    InvalidLongitude(f64),
    #[error("bearing undefined between coincident points")]
    CoincidentPoints,
    #[error("cannot parse coordinate pair from {0:?}")]
    Unparseable(String),
}

/// A WGS84 coordinate in decimal degrees.
///
/// Longitude is normalized into `[-180, 180)` on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct GeoPoint {
    lat: f64,
    lon: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    lat: f64,
    lon: f64,
}

impl TryFrom<RawPoint> for GeoPoint {
    type Error = GeoError;

    fn try_from(raw: RawPoint) -> Result<Self, Self::Error> {
        GeoPoint::new(raw.lat, raw.lon)
    }
}

impl From<GeoPoint> for RawPoint {
    fn from(p: GeoPoint) -> Self {
        RawPoint { lat: p.lat, lon: p.lon }
    }
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self, GeoError> {
        if !lat_deg.is_finite() || !(-90.0..=90.0).contains(&lat_deg) {
            return Err(GeoError::InvalidLatitude(lat_deg));
        }
        if !lon_deg.is_finite() {
            return Err(GeoError::InvalidLongitude(lon_deg));
        }
        Ok(Self {
            lat: lat_deg,
            lon: normalize_lon(lon_deg),
        })
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat_rad(&self) -> f64 {
        self.lat.to_radians()
    }

    pub fn lon_rad(&self) -> f64 {
        self.lon.to_radians()
    }

    /// `"(40.76208, -73.98042)"`, as it appears on the prompt's coordinate line.
    pub fn render(&self) -> String {
        format!(
            "({}, {})",
            numfmt::fixed(self.lat, 5),
            numfmt::fixed(self.lon, 5)
        )
    }

    /// Parses the output of [`GeoPoint::render`] (parentheses optional).
    pub fn parse(text: &str) -> Result<Self, GeoError> {
        let bad = || GeoError::Unparseable(text.to_string());
        let inner = text
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')');
        let (lat, lon) = inner.split_once(',').ok_or_else(bad)?;
        let lat: f64 = lat.trim().parse().map_err(|_| bad())?;
        let lon: f64 = lon.trim().parse().map_err(|_| bad())?;
        GeoPoint::new(lat, lon)
    }

    /// Cache/overlap key: both axes rounded to 5 decimals.
    pub fn key5(&self) -> String {
        format!(
            "{}:{}",
            numfmt::fixed(self.lat, 5),
            numfmt::fixed(self.lon, 5)
        )
    }

    /// Position on the unit sphere (x towards (0,0), z towards the north pole).
    pub fn unit_vector(&self) -> [f64; 3] {
        let (slat, clat) = self.lat_rad().sin_cos();
        let (slon, clon) = self.lon_rad().sin_cos();
        [clat * clon, clat * slon, slat]
    }

    /// The point reached by travelling `distance_km` along the great circle
    /// leaving `self` at `bearing_deg`.
    pub fn destination(&self, distance_km: f64, bearing_deg: f64) -> GeoPoint {
        let delta = distance_km / EARTH_RADIUS_KM;
        let theta = bearing_deg.to_radians();
        let (sp1, cp1) = self.lat_rad().sin_cos();
        let sp2 = (sp1 * delta.cos() + cp1 * delta.sin() * theta.cos()).clamp(-1.0, 1.0);
        let phi2 = sp2.asin();
        let lambda2 = self.lon_rad()
            + (theta.sin() * delta.sin() * cp1).atan2(delta.cos() - sp1 * sp2);
        GeoPoint {
            lat: phi2.to_degrees().clamp(-90.0, 90.0),
            lon: normalize_lon(lambda2.to_degrees()),
        }
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn normalize_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        return lon;
    }
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// A great-circle distance. Ordering always uses the exact value; the
/// one-decimal form is for display only.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DistanceKm(f64);

impl DistanceKm {
    pub fn new(exact_km: f64) -> Self {
        debug_assert!(exact_km >= 0.0);
        Self(exact_km)
    }

    pub fn exact_km(&self) -> f64 {
        self.0
    }

    pub fn display_km(&self) -> f64 {
        numfmt::round_to(self.0, 1)
    }
}

impl fmt::Display for DistanceKm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&numfmt::fixed(self.0, 1))
    }
}

pub fn haversine_km(a: GeoPoint, b: GeoPoint) -> DistanceKm {
    let dphi = (b.lat - a.lat).to_radians();
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2)
        + a.lat_rad().cos() * b.lat_rad().cos() * (dlambda / 2.0).sin().powi(2);
    let c = 2.0 * h.sqrt().min(1.0).asin();
    DistanceKm(EARTH_RADIUS_KM * c)
}

/// Initial great-circle bearing from `from` to `to`, degrees clockwise from
/// true north in `[0, 360)`.
pub fn initial_bearing_deg(from: GeoPoint, to: GeoPoint) -> Result<f64, GeoError> {
    if from == to {
        return Err(GeoError::CoincidentPoints);
    }
    let (sp1, cp1) = from.lat_rad().sin_cos();
    let (sp2, cp2) = to.lat_rad().sin_cos();
    let dlambda = (to.lon - from.lon).to_radians();
    let y = dlambda.sin() * cp2;
    let x = cp1 * sp2 - sp1 * cp2 * dlambda.cos();
    let deg = y.atan2(x).to_degrees().rem_euclid(360.0);
    Ok(if deg >= 360.0 { 0.0 } else { deg })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CompassDirection {
    #[serde(rename = "North")]
    North,
    #[serde(rename = "North-East")]
    NorthEast,
    #[serde(rename = "East")]
    East,
    #[serde(rename = "South-East")]
    SouthEast,
    #[serde(rename = "South")]
    South,
    #[serde(rename = "South-West")]
    SouthWest,
    #[serde(rename = "West")]
    West,
    #[serde(rename = "North-West")]
    NorthWest,
}

impl CompassDirection {
    /// Clockwise from north.
    pub const ALL: [CompassDirection; 8] = [
        CompassDirection::North,
        CompassDirection::NorthEast,
        CompassDirection::East,
        CompassDirection::SouthEast,
        CompassDirection::South,
        CompassDirection::SouthWest,
        CompassDirection::West,
        CompassDirection::NorthWest,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CompassDirection::North => "North",
            CompassDirection::NorthEast => "North-East",
            CompassDirection::East => "East",
            CompassDirection::SouthEast => "South-East",
            CompassDirection::South => "South",
            CompassDirection::SouthWest => "South-West",
            CompassDirection::West => "West",
            CompassDirection::NorthWest => "North-West",
        }
    }

    /// Position in [`CompassDirection::ALL`]; also the one-hot slot.
    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn center_deg(&self) -> f64 {
        self.index() as f64 * 45.0
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

impl fmt::Display for CompassDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a bearing onto the compass point whose half-open sector
/// `[center - 22.5, center + 22.5)` contains it.
pub fn classify_direction(bearing_deg: f64) -> CompassDirection {
    let b = bearing_deg.rem_euclid(360.0);
    let sector = ((b + 22.5) / 45.0).floor() as usize % 8;
    CompassDirection::ALL[sector]
}
