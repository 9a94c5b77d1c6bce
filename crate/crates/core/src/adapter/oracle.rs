use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AdapterError, PredictionSet, Predictor, SyntheticWorld};
use crate::dataset::Outcome;
use crate::geo::GeoPoint;
use crate::label::{BinLabel, LabelBinner};
use crate::prompt::{PromptComponents, PromptRecord};
use crate::rng::keyed_rng;

/// Weight of each missing component in the degradation noise. Nearby places
/// carry the most signal and coordinates the least; distinct weights keep
/// every two-component prompt distinguishable.
pub const MISSING_WEIGHT_COORDINATES: f64 = 0.5;
pub const MISSING_WEIGHT_ADDRESS: f64 = 1.0;
pub const MISSING_WEIGHT_NEARBY: f64 = 2.0;

/// Label-space noise, in bin units (1.0 = ten tenths).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    Gaussian { sigma: f64 },
    /// Integer offset drawn uniformly from `-half_width..=half_width` tenths.
    UniformTenths { half_width: u8 },
    /// Gaussian with a different spread for true labels at or below `pivot`.
    Split { pivot: f64, sigma_below: f64, sigma_above: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Knowledge {
    /// Exact answers.
    Full,
    /// Exact with every component; otherwise Gaussian noise with
    /// `sigma × Σ weight(missing component)`.
    CoordinatesOnly { sigma: f64 },
    Noisy(NoiseModel),
}

/// A deterministic stand-in for a fine-tuned model: looks up the hidden
/// surface at the prompt's point, encodes it with the task binner and
/// perturbs it according to `knowledge`.
#[derive(Debug, Clone)]
pub struct MockOracle {
    pub world: SyntheticWorld,
    pub binner: LabelBinner,
    pub knowledge: Knowledge,
    pub seed: u64,
}

fn missing_weight(c: PromptComponents) -> f64 {
    let mut w = 0.0;
    if !c.coordinates {
        w += MISSING_WEIGHT_COORDINATES;
    }
    if !c.address {
        w += MISSING_WEIGHT_ADDRESS;
    }
    if !c.nearby_places {
        w += MISSING_WEIGHT_NEARBY;
    }
    w
}

fn mask_key(id: &str, c: PromptComponents) -> String {
    format!(
        "{id}|{}{}{}",
        u8::from(c.coordinates),
        u8::from(c.address),
        u8::from(c.nearby_places)
    )
}

impl MockOracle {
    pub fn new(world: SyntheticWorld, binner: LabelBinner, knowledge: Knowledge, seed: u64) -> Self {
        Self {
            world,
            binner,
            knowledge,
            seed,
        }
    }

    /// The label the oracle gives for one prompt. Noise draws are keyed by
    /// `(seed, id, component mask)`.
    pub fn answer(&self, id: &str, point: GeoPoint, components: PromptComponents) -> BinLabel {
        let truth = self.binner.encode(self.world.value(point));
        let mut rng = keyed_rng(self.seed, "oracle", &mask_key(id, components));
        let gaussian = |sigma: f64, rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
            if sigma > 0.0 {
                Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
            } else {
                0.0
            }
        };
        let offset = match self.knowledge {
            Knowledge::Full => 0.0,
            Knowledge::CoordinatesOnly { sigma } => gaussian(sigma * missing_weight(components), &mut rng),
            Knowledge::Noisy(NoiseModel::Gaussian { sigma }) => gaussian(sigma, &mut rng),
            Knowledge::Noisy(NoiseModel::UniformTenths { half_width }) => {
                let h = i32::from(half_width);
                f64::from(rand::Rng::random_range(&mut rng, -h..=h)) / 10.0
            }
            Knowledge::Noisy(NoiseModel::Split {
                pivot,
                sigma_below,
                sigma_above,
            }) => {
                let sigma = if truth.value() <= pivot { sigma_below } else { sigma_above };
                gaussian(sigma, &mut rng)
            }
        };
        if offset == 0.0 {
            truth
        } else {
            BinLabel::snap(truth.value() + offset)
        }
    }

    /// The completion text a model would return: the label, e.g. `"4.2"`.
    pub fn complete(&self, id: &str, point: GeoPoint, components: PromptComponents) -> String {
        self.answer(id, point, components).to_string()
    }
}

impl Predictor for MockOracle {
    fn name(&self) -> String {
        format!("mock-oracle(seed={})", self.seed)
    }

    fn predict(&self, prompts: &[PromptRecord]) -> Result<PredictionSet, AdapterError> {
        let mut set = PredictionSet::new(self.name());
        for p in prompts {
            set.insert(&p.id, Outcome::Label(self.answer(&p.id, p.point, p.components)))?;
        }
        Ok(set)
    }
}
