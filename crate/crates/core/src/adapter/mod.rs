//! Prediction sources behind one interface: completion files, the
//! baselines, a pluggable completion client and a deterministic mock oracle.

mod oracle;
mod synth;

pub use oracle::{
    Knowledge, MockOracle, NoiseModel, MISSING_WEIGHT_ADDRESS, MISSING_WEIGHT_COORDINATES, MISSING_WEIGHT_NEARBY,
};
pub use synth::{synthetic_addresses, synthetic_snapshot, BoundingBox, Bump, SyntheticWorld};

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::baseline::{BaselineError, FeatureVector, GbtModel, KnnRegressor};
use crate::dataset::{read_predictions, DatasetError, Outcome};
use crate::label::BinLabel;
use crate::prompt::PromptRecord;

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("unknown id {0:?}")]
    UnknownId(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One outcome per id plus where the predictions came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    pub outcomes: BTreeMap<String, Outcome>,
    pub provenance: String,
}

#[derive(Serialize)]
struct PredictionLine<'a> {
    id: &'a str,
    completion: &'a str,
}

impl PredictionSet {
    pub fn new(provenance: impl Into<String>) -> Self {
        Self {
            outcomes: BTreeMap::new(),
            provenance: provenance.into(),
        }
    }

    pub fn insert(&mut self, id: &str, outcome: Outcome) -> Result<(), AdapterError> {
        if self.outcomes.insert(id.to_string(), outcome).is_some() {
            return Err(AdapterError::DuplicateId(id.to_string()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn label(&self, id: &str) -> Option<BinLabel> {
        self.outcomes.get(id).and_then(Outcome::label)
    }

    pub fn n_unparseable(&self) -> usize {
        self.outcomes.values().filter(|o| o.label().is_none()).count()
    }

    /// Writes the predictions file format, `{"id", "completion"}` per line,
    /// in id order. Unparseable outcomes keep their raw text.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for (id, outcome) in &self.outcomes {
            let text;
            let completion = match outcome {
                Outcome::Label(l) => {
                    text = l.to_string();
                    text.as_str()
                }
                Outcome::Unparseable { raw } => raw.as_str(),
            };
            serde_json::to_writer(&mut w, &PredictionLine { id, completion })?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), AdapterError> {
        crate::io::write_atomic(path, |w| self.write_jsonl(w).map_err(AdapterError::from))
    }

    pub fn read_jsonl(reader: impl Read, expected: &[String], provenance: &str) -> Result<Self, AdapterError> {
        Ok(Self {
            outcomes: read_predictions(reader, expected)?,
            provenance: provenance.to_string(),
        })
    }
}

/// Anything that turns prompts into labels.
pub trait Predictor {
    fn name(&self) -> String;
    fn predict(&self, prompts: &[PromptRecord]) -> Result<PredictionSet, AdapterError>;
}

/// Completions read back from a predictions file, joined by id.
#[derive(Debug, Clone)]
pub struct FileAdapter {
    pub path: PathBuf,
}

impl Predictor for FileAdapter {
    fn name(&self) -> String {
        format!("file:{}", self.path.display())
    }

    fn predict(&self, prompts: &[PromptRecord]) -> Result<PredictionSet, AdapterError> {
        let ids: Vec<String> = prompts.iter().map(|p| p.id.clone()).collect();
        PredictionSet::read_jsonl(std::fs::File::open(&self.path)?, &ids, &self.name())
    }
}

pub enum BaselineAdapter {
    Knn(KnnRegressor),
    /// Features are looked up by id, since prompt text alone loses the exact distances.
    Gbt {
        model: GbtModel,
        features: HashMap<String, FeatureVector>,
    },
}

impl Predictor for BaselineAdapter {
    fn name(&self) -> String {
        match self {
            BaselineAdapter::Knn(k) => format!("knn(k={})", k.k()),
            BaselineAdapter::Gbt { model, .. } => format!("gbt(trees={})", model.trees().len()),
        }
    }

    fn predict(&self, prompts: &[PromptRecord]) -> Result<PredictionSet, AdapterError> {
        let mut set = PredictionSet::new(self.name());
        for p in prompts {
            let label = match self {
                BaselineAdapter::Knn(knn) => knn.predict(p.point),
                BaselineAdapter::Gbt { model, features } => {
                    let f = features.get(&p.id).ok_or_else(|| AdapterError::UnknownId(p.id.clone()))?;
                    model.predict(f.values())?
                }
            };
            set.insert(&p.id, Outcome::Label(label))?;
        }
        Ok(set)
    }
}

/// Something that can complete a prompt, e.g. a client for a hosted model.
pub trait CompletionClient {
    fn complete(&self, prompt: &str) -> Result<String, AdapterError>;
}

/// Sends each prompt through a [`CompletionClient`] and parses the answer.
pub struct CompletionAdapter<C> {
    pub client: C,
    pub name: String,
}

impl<C: CompletionClient> Predictor for CompletionAdapter<C> {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn predict(&self, prompts: &[PromptRecord]) -> Result<PredictionSet, AdapterError> {
        let mut set = PredictionSet::new(self.name());
        for p in prompts {
            let text = self.client.complete(&p.text)?;
            set.insert(&p.id, Outcome::from_completion(&text))?;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{label_plan, make_splits};
    use crate::label::BinningHint;
    use crate::prompt::PromptComponents;

    fn setup() -> (MockOracle, Vec<PromptRecord>, BTreeMap<String, BinLabel>) {
        let world = SyntheticWorld::generate(1, BoundingBox::default(), 10);
        let ds = world.dataset(300, 2, "T", 0.0).unwrap();
        let plan = make_splits(&ds, 3, 50, 50, &[200]).unwrap();
        let pl = label_plan(&ds, &plan, BinningHint::Quantile).unwrap();
        let prompts = ds
            .samples
            .iter()
            .map(|s| PromptRecord {
                id: s.id.clone(),
                point: s.point,
                text: String::new(),
                components: PromptComponents::ALL,
                task_name: "T".into(),
            })
            .collect();
        (MockOracle::new(world, pl.binner, Knowledge::Full, 4), prompts, pl.labels)
    }

    #[test]
    fn full_knowledge_is_identity() {
        let (oracle, prompts, labels) = setup();
        let set = oracle.predict(&prompts).unwrap();
        assert_eq!(set.len(), 300);
        for (id, label) in &labels {
            assert_eq!(set.label(id), Some(*label));
        }
    }

    #[test]
    fn file_round_trip() {
        let (oracle, prompts, _) = setup();
        let mut set = oracle.predict(&prompts).unwrap();
        set.outcomes.insert(
            prompts[0].id.clone(),
            Outcome::Unparseable {
                raw: "no idea".into(),
            },
        );
        let mut buf = Vec::new();
        set.write_jsonl(&mut buf).unwrap();
        let ids: Vec<String> = prompts.iter().map(|p| p.id.clone()).collect();
        let back = PredictionSet::read_jsonl(buf.as_slice(), &ids, &set.provenance).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.n_unparseable(), 1);
    }

    #[test]
    fn degradation_is_deterministic_and_masks_differ() {
        let (mut oracle, prompts, _) = setup();
        oracle.knowledge = Knowledge::CoordinatesOnly { sigma: 1.0 };
        let p = &prompts[0];
        let only_coords = PromptComponents::new(true, false, false).unwrap();
        assert_eq!(
            oracle.answer(&p.id, p.point, only_coords),
            oracle.answer(&p.id, p.point, only_coords)
        );
        assert_eq!(
            oracle.answer(&p.id, p.point, PromptComponents::ALL),
            oracle.binner.encode(oracle.world.value(p.point))
        );
    }

    struct Echo;
    impl CompletionClient for Echo {
        fn complete(&self, prompt: &str) -> Result<String, AdapterError> {
            Ok(if prompt.is_empty() { "7.0".into() } else { "??".into() })
        }
    }

    #[test]
    fn completion_adapter_parses_answers() {
        let (_, mut prompts, _) = setup();
        prompts.truncate(2);
        prompts[1].text = "x".into();
        let set = CompletionAdapter {
            client: Echo,
            name: "echo".into(),
        }
        .predict(&prompts)
        .unwrap();
        assert_eq!(set.label(&prompts[0].id).unwrap().to_string(), "7.0");
        assert_eq!(set.n_unparseable(), 1);
    }
}
