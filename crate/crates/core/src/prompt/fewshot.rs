use serde::{Deserialize, Serialize};

use super::{PromptError, PromptRecord};
use crate::label::BinLabel;
use crate::spatial::SpatialIndex;

pub const SYSTEM_MESSAGES: [&str; 2] = [
    "You are a detailed and knowledgeable geographer",
    "You complete sequences of data with predictions/estimates",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPrompt {
    pub prompt: PromptRecord,
    pub label: BinLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: &str, content: impl Into<String>) -> Self {
        Self {
            role: role.to_string(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FewShotContext {
    pub system_messages: [&'static str; 2],
    /// Nearest first.
    pub examples: Vec<LabeledPrompt>,
    pub query: PromptRecord,
}

impl FewShotContext {
    /// System messages, then one user/assistant pair per example, then the
    /// query as the final user turn.
    pub fn to_chat_messages(&self) -> Vec<ChatMessage> {
        let mut out: Vec<ChatMessage> = self
            .system_messages
            .iter()
            .map(|s| ChatMessage::new("system", *s))
            .collect();
        for ex in &self.examples {
            out.push(ChatMessage::new("user", ex.prompt.text.clone()));
            out.push(ChatMessage::new("assistant", ex.label.to_string()));
        }
        out.push(ChatMessage::new("user", self.query.text.clone()));
        out
    }
}

/// Nearest-neighbour lookup over a fixed training set; build once and reuse
/// for every query.
pub struct FewShotAssembler<'a> {
    train: &'a [LabeledPrompt],
    index: SpatialIndex,
}

impl<'a> FewShotAssembler<'a> {
    pub fn new(train: &'a [LabeledPrompt]) -> Self {
        let index = SpatialIndex::build(train.iter().map(|t| t.prompt.point).collect());
        Self { train, index }
    }

    /// The `k` training samples closest to the query, ties broken by
    /// longitude, latitude, then id.
    pub fn assemble(&self, query: &PromptRecord, k: usize) -> Result<FewShotContext, PromptError> {
        if self.train.len() < k {
            return Err(PromptError::InsufficientTrainingData {
                need: k,
                got: self.train.len(),
            });
        }
        let train = self.train;
        let ranked = self
            .index
            .nearest(query.point, k, f64::INFINITY, &|_| false, |a, b| {
                let (pa, pb) = (&train[a].prompt, &train[b].prompt);
                pa.point
                    .lon()
                    .total_cmp(&pb.point.lon())
                    .then(pa.point.lat().total_cmp(&pb.point.lat()))
                    .then_with(|| pa.id.cmp(&pb.id))
            });
        Ok(FewShotContext {
            system_messages: SYSTEM_MESSAGES,
            examples: ranked.into_iter().map(|(i, _)| train[i].clone()).collect(),
            query: query.clone(),
        })
    }
}

pub fn assemble_few_shot(
    query: &PromptRecord,
    train: &[LabeledPrompt],
    k: usize,
) -> Result<FewShotContext, PromptError> {
    FewShotAssembler::new(train).assemble(query, k)
}
