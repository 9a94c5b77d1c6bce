use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{KvCache, MapError};
use crate::geo::GeoPoint;

/// A reverse-geocoded address, finest component first.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressRecord {
    display: String,
    point: GeoPoint,
}

impl AddressRecord {
    /// Double quotes are stripped and line breaks flattened so the prompt's
    /// quoted address stays well-formed. Fails with `NoAddressFound` when
    /// nothing is left.
    pub fn new(display: &str, point: GeoPoint) -> Result<Self, MapError> {
        let cleaned: String = display
            .chars()
            .filter(|&c| c != '"')
            .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        let cleaned = cleaned.trim();
        if cleaned.is_empty() {
            return Err(MapError::NoAddressFound(point.key5()));
        }
        Ok(Self {
            display: cleaned.to_string(),
            point,
        })
    }

    pub fn display(&self) -> &str {
        &self.display
    }

    pub fn point(&self) -> GeoPoint {
        self.point
    }
}

/// Anything that can turn a coordinate into an address.
pub trait AddressProvider: Send + Sync {
    fn name(&self) -> &str;
    fn reverse(&self, p: GeoPoint) -> Result<AddressRecord, MapError>;
}

/// Reverse geocodes through `cache` keyed by `rev:{lat5}:{lon5}`.
///
/// Negative answers are cached too (as an empty value) so that repeated runs
/// over ocean or desert points stay offline.
pub fn reverse_geocode(
    p: GeoPoint,
    provider: &dyn AddressProvider,
    cache: &KvCache,
) -> Result<AddressRecord, MapError> {
    let key = format!("rev:{}", p.key5());
    if let Some(hit) = cache.get(&key) {
        return AddressRecord::new(&hit, p);
    }
    match provider.reverse(p) {
        Ok(record) => {
            cache.put(&key, record.display())?;
            Ok(record)
        }
        Err(MapError::NoAddressFound(k)) => {
            cache.put(&key, "")?;
            Err(MapError::NoAddressFound(k))
        }
        Err(e) => Err(e),
    }
}

#[derive(Serialize, Deserialize)]
struct AddressLine {
    lat: f64,
    lon: f64,
    display: String,
}

/// Offline address lookup keyed by the 5-decimal rendering of the point.
#[derive(Debug, Clone, Default)]
pub struct AddressBook {
    entries: HashMap<String, String>,
}

impl AddressBook {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: GeoPoint, display: &str) {
        self.entries.insert(p.key5(), display.to_string());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, MapError> {
        let mut book = Self::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: AddressLine =
                serde_json::from_str(&line).map_err(|e| MapError::InvalidRecord {
                    line: i + 1,
                    reason: e.to_string(),
                })?;
            let p = GeoPoint::new(parsed.lat, parsed.lon).map_err(|e| MapError::InvalidRecord {
                line: i + 1,
                reason: e.to_string(),
            })?;
            book.insert(p, &parsed.display);
        }
        Ok(book)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MapError> {
        Self::from_reader(File::open(path)?)
    }

    /// Entries sorted by key, one JSON object per line.
    pub fn write_to(&self, writer: impl Write) -> Result<(), MapError> {
        let mut keys: Vec<&String> = self.entries.keys().collect();
        keys.sort();
        let mut w = BufWriter::new(writer);
        for k in keys {
            let (lat, lon) = k.split_once(':').expect("key5 has a colon");
            let line = AddressLine {
                lat: lat.parse().expect("key5 latitude"),
                lon: lon.parse().expect("key5 longitude"),
                display: self.entries[k].clone(),
            };
            writeln!(w, "{}", serde_json::to_string(&line).expect("address line serializes"))?;
        }
        w.flush()?;
        Ok(())
    }
}

impl AddressProvider for AddressBook {
    fn name(&self) -> &str {
        "address-book"
    }

    fn reverse(&self, p: GeoPoint) -> Result<AddressRecord, MapError> {
        match self.entries.get(&p.key5()) {
            Some(display) => AddressRecord::new(display, p),
            None => Err(MapError::NoAddressFound(p.key5())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting {
        calls: AtomicUsize,
        answer: Option<&'static str>,
    }

    impl AddressProvider for Counting {
        fn name(&self) -> &str {
            "counting"
        }

        fn reverse(&self, p: GeoPoint) -> Result<AddressRecord, MapError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            match self.answer {
                Some(a) => AddressRecord::new(a, p),
                None => Err(MapError::NoAddressFound(p.key5())),
            }
        }
    }

    #[test]
    fn quotes_stripped_and_empty_rejected() {
        let p = GeoPoint::new(1.0, 2.0).unwrap();
        let r = AddressRecord::new(" The \"Old\" Mill,\nTown ", p).unwrap();
        assert_eq!(r.display(), "The Old Mill, Town");
        assert!(matches!(AddressRecord::new(" \"\" ", p), Err(MapError::NoAddressFound(_))));
    }

    #[test]
    fn primed_cache_answers_without_provider() {
        let provider = Counting {
            calls: AtomicUsize::new(0),
            answer: Some("Manchok, Kaura, Kaduna, Nigeria"),
        };
        let cache = KvCache::in_memory();
        let p = GeoPoint::new(9.637081, 8.486249).unwrap();
        let a = reverse_geocode(p, &provider, &cache).unwrap();
        let b = reverse_geocode(GeoPoint::new(9.63708, 8.48625).unwrap(), &provider, &cache).unwrap();
        assert_eq!(a.display(), b.display());
        assert_eq!(provider.calls.load(Ordering::SeqCst), 1);
        assert_eq!(
            cache.get("rev:9.63708:8.48625").as_deref(),
            Some("Manchok, Kaura, Kaduna, Nigeria")
        );
    }

    #[test]
    fn negative_answers_are_cached() {
        let provider = Counting {
            calls: AtomicUsize::new(0),
            answer: None,
        };
        let cache = KvCache::in_memory();
        let p = GeoPoint::new(-30.0, -140.0).unwrap();
        for _ in 0..3 {
            assert!(matches!(
                reverse_geocode(p, &provider, &cache),
                Err(MapError::NoAddressFound(_))
            ));
        }
        assert_eq!(provider.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn book_round_trip() {
        let mut book = AddressBook::new();
        book.insert(GeoPoint::new(9.63708, 8.48625).unwrap(), "Manchok, Kaura, Kaduna, Nigeria");
        book.insert(GeoPoint::new(-1.5, 30.25).unwrap(), "Somewhere");
        let mut buf = Vec::new();
        book.write_to(&mut buf).unwrap();
        let back = AddressBook::from_reader(buf.as_slice()).unwrap();
        let p = GeoPoint::new(-1.5, 30.25).unwrap();
        assert_eq!(back.reverse(p).unwrap().display(), "Somewhere");
        assert_eq!(back.len(), 2);
    }
}
