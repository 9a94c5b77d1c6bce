use super::{PromptComponents, PromptError, SCALE_SUFFIX};
use crate::geo::{CompassDirection, GeoPoint};

/// One `<d> km <Direction>: <name>` line as written in a prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedNearby {
    /// Distance exactly as printed, one decimal.
    pub distance_text: String,
    pub direction: CompassDirection,
    pub name: String,
}

impl ParsedNearby {
    pub fn distance_km(&self) -> f64 {
        self.distance_text.parse().unwrap_or(f64::NAN)
    }
}

/// Structured view of a rendered prompt. Blocks appear in template order;
/// anything else is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPrompt {
    pub coordinates: Option<GeoPoint>,
    pub address: Option<String>,
    pub nearby: Option<Vec<ParsedNearby>>,
    pub task_name: String,
    /// Text after the task line, if the prompt carries a label.
    pub label: Option<String>,
}

fn malformed(msg: impl Into<String>) -> PromptError {
    PromptError::Malformed(msg.into())
}

impl ParsedPrompt {
    pub fn parse(text: &str) -> Result<Self, PromptError> {
        if text.contains('\r') {
            return Err(malformed("carriage return in prompt"));
        }
        let blocks: Vec<&str> = text.split("\n\n").collect();
        let (task_block, body) = blocks.split_last().ok_or_else(|| malformed("empty prompt"))?;
        let cut = task_block
            .rfind(SCALE_SUFFIX)
            .ok_or_else(|| malformed("missing task line"))?;
        let task_name = &task_block[..cut];
        if task_name.is_empty() || task_name.contains('\n') {
            return Err(malformed("bad task name"));
        }
        let tail = &task_block[cut + SCALE_SUFFIX.len()..];

        let mut out = ParsedPrompt {
            coordinates: None,
            address: None,
            nearby: None,
            task_name: task_name.to_string(),
            label: (!tail.is_empty()).then(|| tail.to_string()),
        };
        // 0 = nothing yet, 1 = coordinates seen, 2 = address seen, 3 = nearby seen.
        let mut stage = 0;
        for block in body {
            if let Some(rest) = block.strip_prefix("Coordinates: ") {
                if stage >= 1 {
                    return Err(malformed("coordinates out of order"));
                }
                stage = 1;
                out.coordinates = Some(GeoPoint::parse(rest).map_err(|e| malformed(e.to_string()))?);
            } else if let Some(rest) = block.strip_prefix("Address: \"") {
                if stage >= 2 {
                    return Err(malformed("address out of order"));
                }
                stage = 2;
                let inner = rest
                    .strip_suffix('"')
                    .filter(|s| !s.contains('\n'))
                    .ok_or_else(|| malformed("unterminated address"))?;
                out.address = Some(inner.to_string());
            } else if let Some(rest) = block.strip_prefix("Nearby Places:\n\"\n") {
                if stage >= 3 {
                    return Err(malformed("nearby places out of order"));
                }
                stage = 3;
                let inner = rest
                    .strip_suffix('"')
                    .ok_or_else(|| malformed("unterminated nearby places"))?;
                let mut places = Vec::new();
                for line in inner.lines() {
                    places.push(parse_nearby_line(line)?);
                }
                if !inner.is_empty() && !inner.ends_with('\n') {
                    return Err(malformed("nearby places block must end with a newline"));
                }
                out.nearby = Some(places);
            } else {
                return Err(malformed(format!("unknown block {:?}", block.lines().next().unwrap_or(""))));
            }
        }
        if stage == 0 {
            return Err(PromptError::NoComponents);
        }
        Ok(out)
    }

    pub fn components(&self) -> PromptComponents {
        PromptComponents {
            coordinates: self.coordinates.is_some(),
            address: self.address.is_some(),
            nearby_places: self.nearby.is_some(),
        }
    }
}

fn parse_nearby_line(line: &str) -> Result<ParsedNearby, PromptError> {
    let bad = || malformed(format!("bad nearby line {line:?}"));
    let (dist, rest) = line.split_once(" km ").ok_or_else(bad)?;
    let (dir, name) = rest.split_once(": ").ok_or_else(bad)?;
    let direction = CompassDirection::parse(dir).ok_or_else(bad)?;
    let ok_dist = dist
        .split_once('.')
        .is_some_and(|(i, f)| !i.is_empty() && i.bytes().all(|b| b.is_ascii_digit()) && f.len() == 1 && f.bytes().all(|b| b.is_ascii_digit()));
    if !ok_dist || name.is_empty() {
        return Err(bad());
    }
    Ok(ParsedNearby {
        distance_text: dist.to_string(),
        direction,
        name: name.to_string(),
    })
}
