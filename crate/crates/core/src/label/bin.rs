use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LabelError;

/// One of the 100 labels `0.0, 0.1, …, 9.9`, stored in tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinLabel(u8);

impl BinLabel {
    pub const COUNT: usize = 100;
    pub const MIN: BinLabel = BinLabel(0);
    pub const MAX: BinLabel = BinLabel(99);

    pub fn from_tenths(tenths: u8) -> Option<Self> {
        (tenths < 100).then_some(Self(tenths))
    }

    /// Bin index in `0..100`.
    pub fn from_index(index: usize) -> Option<Self> {
        u8::try_from(index).ok().and_then(Self::from_tenths)
    }

    /// Clamps into `[0.0, 9.9]` and rounds to the nearest tenth (ties away
    /// from zero). NaN maps to `0.0`.
    pub fn snap(value: f64) -> Self {
        if value.is_nan() {
            return Self::MIN;
        }
        let tenths = (value.clamp(0.0, 9.9) * 10.0).round();
        Self(tenths.clamp(0.0, 99.0) as u8)
    }

    pub fn tenths(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    pub fn all() -> impl Iterator<Item = BinLabel> {
        (0..100u8).map(BinLabel)
    }

    /// Strict parse of the rendered form `d.d`.
    pub fn parse(text: &str) -> Result<Self, LabelError> {
        let bad = || LabelError::Unparseable(text.to_string());
        let bytes = text.as_bytes();
        if bytes.len() != 3 || bytes[1] != b'.' || !bytes[0].is_ascii_digit() || !bytes[2].is_ascii_digit() {
            return Err(bad());
        }
        Ok(Self((bytes[0] - b'0') * 10 + (bytes[2] - b'0')))
    }
}

impl fmt::Display for BinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl Serialize for BinLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for BinLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        let snapped = BinLabel::snap(v);
        if (snapped.value() - v).abs() > 1e-9 {
            return Err(serde::de::Error::custom(format!("{v} is not a bin label")));
        }
        Ok(snapped)
    }
}
