//! Glue between a dataset and its prompts: per-sample map context, prompt
//! rendering for every sample and baseline features.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{embedding_text, BaselineError, EmbeddingProvider, FeatureVector};
use crate::dataset::TaskDataset;
use crate::geo::GeoPoint;
use crate::mapdata::{
    nearest_places, reverse_geocode, AddressProvider, AddressRecord, KvCache, MapError, NearbyPlace, PlaceSnapshot,
    DEFAULT_LIMIT, DEFAULT_RADIUS_KM,
};
use crate::prompt::{render_prompt, PromptComponents, PromptError, PromptInputs, PromptRecord};

/// Address and nearby places resolved for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleContext {
    pub id: String,
    pub point: GeoPoint,
    pub address: Option<String>,
    pub nearby: Vec<NearbyPlace>,
}

impl SampleContext {
    pub fn to_inputs(&self, task_name: &str) -> PromptInputs {
        PromptInputs {
            id: self.id.clone(),
            point: self.point,
            address: self
                .address
                .as_deref()
                .and_then(|a| AddressRecord::new(a, self.point).ok()),
            nearby: Some(self.nearby.clone()),
            task_name: task_name.to_string(),
        }
    }
}

/// Resolves every sample, in dataset order. A point without an address
/// keeps `address: None`; any other provider failure aborts.
pub fn build_contexts(
    ds: &TaskDataset,
    snapshot: &PlaceSnapshot,
    provider: &dyn AddressProvider,
    cache: &KvCache,
) -> Result<Vec<SampleContext>, MapError> {
    ds.samples
        .par_iter()
        .map(|s| {
            let address = match reverse_geocode(s.point, provider, cache) {
                Ok(a) => Some(a.display().to_string()),
                Err(MapError::NoAddressFound(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(SampleContext {
                id: s.id.clone(),
                point: s.point,
                address,
                nearby: nearest_places(s.point, snapshot, DEFAULT_LIMIT, DEFAULT_RADIUS_KM),
            })
        })
        .collect()
}

pub fn write_contexts(contexts: &[SampleContext], mut w: impl Write) -> std::io::Result<()> {
    for c in contexts {
        serde_json::to_writer(&mut w, c)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_contexts(reader: impl Read) -> Result<Vec<SampleContext>, MapError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| MapError::InvalidRecord {
            line: i + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Renders one prompt per context. Samples with no address lose the address
/// block (their record's components say so); a prompt left with no block at
/// all is an error.
pub fn render_contexts(
    contexts: &[SampleContext],
    task_name: &str,
    components: PromptComponents,
) -> Result<Vec<PromptRecord>, PromptError> {
    contexts
        .iter()
        .map(|c| {
            let inputs = c.to_inputs(task_name);
            let mut mask = components;
            if inputs.address.is_none() {
                mask.address = false;
            }
            if mask.count() == 0 {
                return Err(PromptError::MissingComponentData("address"));
            }
            render_prompt(&inputs, mask)
        })
        .collect()
}

/// Baseline features keyed by id, optionally with a text embedding of the
/// address and place names appended.
pub fn features_for(
    contexts: &[SampleContext],
    embedder: Option<&dyn EmbeddingProvider>,
) -> Result<HashMap<String, FeatureVector>, BaselineError> {
    contexts
        .iter()
        .map(|c| {
            let mut f = FeatureVector::from_parts(c.point, &c.nearby);
            if let Some(e) = embedder {
                f = f.with_embedding(&e.embed(&embedding_text(c.address.as_deref(), &c.nearby))?);
            }
            Ok((c.id.clone(), f))
        })
        .collect()
}
