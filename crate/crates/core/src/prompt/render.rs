use std::fmt;

use serde::{Deserialize, Serialize};

use super::{PromptError, SCALE_SUFFIX};
use crate::geo::GeoPoint;
use crate::mapdata::{AddressRecord, NearbyPlace};

/// Which template blocks a prompt carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptComponents {
    pub coordinates: bool,
    pub address: bool,
    pub nearby_places: bool,
}

impl PromptComponents {
    pub const ALL: PromptComponents = PromptComponents {
        coordinates: true,
        address: true,
        nearby_places: true,
    };

    pub fn new(coordinates: bool, address: bool, nearby_places: bool) -> Result<Self, PromptError> {
        if !(coordinates || address || nearby_places) {
            return Err(PromptError::NoComponents);
        }
        Ok(Self {
            coordinates,
            address,
            nearby_places,
        })
    }

    pub fn count(&self) -> usize {
        usize::from(self.coordinates) + usize::from(self.address) + usize::from(self.nearby_places)
    }
}

/// The seven prompt variants of the ablation grid, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    WholePrompt,
    RemovedCoordinates,
    RemovedAddress,
    RemovedNearbyPlaces,
    OnlyNearbyPlaces,
    OnlyAddress,
    OnlyCoordinates,
}

impl Ablation {
    pub const ALL: [Ablation; 7] = [
        Ablation::WholePrompt,
        Ablation::RemovedCoordinates,
        Ablation::RemovedAddress,
        Ablation::RemovedNearbyPlaces,
        Ablation::OnlyNearbyPlaces,
        Ablation::OnlyAddress,
        Ablation::OnlyCoordinates,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Ablation::WholePrompt => "Whole prompt",
            Ablation::RemovedCoordinates => "Removed coordinates",
            Ablation::RemovedAddress => "Removed address",
            Ablation::RemovedNearbyPlaces => "Removed nearby places",
            Ablation::OnlyNearbyPlaces => "Only nearby places",
            Ablation::OnlyAddress => "Only address",
            Ablation::OnlyCoordinates => "Only coordinates",
        }
    }

    /// File-name form of the label, e.g. `removed-nearby-places`.
    pub fn slug(&self) -> String {
        self.label().to_ascii_lowercase().replace(' ', "-")
    }

    pub fn components(&self) -> PromptComponents {
        let (c, a, n) = match self {
            Ablation::WholePrompt => (true, true, true),
            Ablation::RemovedCoordinates => (false, true, true),
            Ablation::RemovedAddress => (true, false, true),
            Ablation::RemovedNearbyPlaces => (true, true, false),
            Ablation::OnlyNearbyPlaces => (false, false, true),
            Ablation::OnlyAddress => (false, true, false),
            Ablation::OnlyCoordinates => (true, false, false),
        };
        PromptComponents {
            coordinates: c,
            address: a,
            nearby_places: n,
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Everything a prompt can be rendered from.
#[derive(Debug, Clone)]
pub struct PromptInputs {
    pub id: String,
    pub point: GeoPoint,
    pub address: Option<AddressRecord>,
    pub nearby: Option<Vec<NearbyPlace>>,
    pub task_name: String,
}

/// A rendered prompt, ending with the task line and no label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub id: String,
    pub point: GeoPoint,
    pub text: String,
    pub components: PromptComponents,
    pub task_name: String,
}

impl PromptRecord {
    /// Prompt followed directly by its label, as used for training.
    pub fn with_label(&self, label: impl fmt::Display) -> String {
        format!("{}{label}", self.text)
    }
}

/// Renders the template blocks selected by `components`, separated by blank
/// lines, followed by `<task> (On a Scale from 0.0 to 9.9): `.
pub fn render_prompt(inputs: &PromptInputs, components: PromptComponents) -> Result<PromptRecord, PromptError> {
    if components.count() == 0 {
        return Err(PromptError::NoComponents);
    }
    let mut blocks: Vec<String> = Vec::with_capacity(4);
    if components.coordinates {
        blocks.push(format!("Coordinates: {}", inputs.point.render()));
    }
    if components.address {
        let address = inputs
            .address
            .as_ref()
            .ok_or(PromptError::MissingComponentData("address"))?;
        blocks.push(format!("Address: \"{}\"", address.display()));
    }
    if components.nearby_places {
        let nearby = inputs
            .nearby
            .as_ref()
            .ok_or(PromptError::MissingComponentData("nearby places"))?;
        let mut block = String::from("Nearby Places:\n\"\n");
        for place in nearby {
            block.push_str(&place.render());
            block.push('\n');
        }
        block.push('"');
        blocks.push(block);
    }
    blocks.push(format!("{}{SCALE_SUFFIX}", inputs.task_name));
    Ok(PromptRecord {
        id: inputs.id.clone(),
        point: inputs.point,
        text: blocks.join("\n\n"),
        components,
        task_name: inputs.task_name.clone(),
    })
}

/// All seven ablation variants, in reporting order.
pub fn ablation_variants(inputs: &PromptInputs) -> Result<Vec<(Ablation, PromptRecord)>, PromptError> {
    Ablation::ALL
        .iter()
        .map(|a| render_prompt(inputs, a.components()).map(|r| (*a, r)))
        .collect()
}
