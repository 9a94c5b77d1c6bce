use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::io::write_atomic;
use crate::label::{parse_completion, BinLabel};
use crate::prompt::{ChatMessage, FewShotContext, PromptRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// `{"messages": [user, assistant]}` per line.
    Chat,
    /// `{"prompt": ..., "completion": ...}` per line.
    Completion,
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chat" => Ok(CorpusFormat::Chat),
            "completion" => Ok(CorpusFormat::Completion),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecord {
    pub id: String,
    pub split: SplitTag,
    pub prompt_text: String,
    /// Absent for inference exports.
    pub label: Option<BinLabel>,
}

impl CorpusRecord {
    /// Records for `ids` in the given order. Labels are attached when a label
    /// map is supplied.
    pub fn build(
        ids: &[String],
        split: SplitTag,
        prompts: &HashMap<String, PromptRecord>,
        labels: Option<&BTreeMap<String, BinLabel>>,
    ) -> Result<Vec<CorpusRecord>, DatasetError> {
        ids.iter()
            .map(|id| {
                let prompt = prompts.get(id).ok_or_else(|| DatasetError::MissingPrompt(id.clone()))?;
                let label = match labels {
                    Some(map) => Some(*map.get(id).ok_or_else(|| DatasetError::UnknownId(id.clone()))?),
                    None => None,
                };
                Ok(CorpusRecord {
                    id: id.clone(),
                    split,
                    prompt_text: prompt.text.clone(),
                    label,
                })
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct ChatLine {
    id: String,
    split: SplitTag,
    messages: Vec<ChatMessage>,
}

#[derive(Serialize, Deserialize)]
struct CompletionLine {
    id: String,
    split: SplitTag,
    prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    completion: Option<String>,
}

fn to_line(r: &CorpusRecord, format: CorpusFormat) -> String {
    let out = match format {
        CorpusFormat::Chat => {
            let mut messages = vec![ChatMessage::new("user", r.prompt_text.clone())];
            if let Some(label) = r.label {
                messages.push(ChatMessage::new("assistant", label.to_string()));
            }
            serde_json::to_string(&ChatLine {
                id: r.id.clone(),
                split: r.split,
                messages,
            })
        }
        CorpusFormat::Completion => serde_json::to_string(&CompletionLine {
            id: r.id.clone(),
            split: r.split,
            prompt: r.prompt_text.clone(),
            completion: r.label.map(|l| l.to_string()),
        }),
    };
    out.expect("corpus lines serialize")
}

pub fn write_corpus(records: &[CorpusRecord], format: CorpusFormat, mut w: impl Write) -> std::io::Result<()> {
    for r in records {
        w.write_all(to_line(r, format).as_bytes())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes one JSON object per record, atomically.
pub fn export_corpus(records: &[CorpusRecord], format: CorpusFormat, path: &Path) -> Result<(), DatasetError> {
    write_atomic(path, |w| write_corpus(records, format, w).map_err(DatasetError::from))
}

/// Writes each few-shot context as `{"id", "split": "test", "messages"}`.
pub fn export_fewshot(contexts: &[FewShotContext], path: &Path) -> Result<(), DatasetError> {
    write_atomic(path, |w| {
        for ctx in contexts {
            let line = serde_json::to_string(&ChatLine {
                id: ctx.query.id.clone(),
                split: SplitTag::Test,
                messages: ctx.to_chat_messages(),
            })
            .expect("few-shot lines serialize");
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Reads either corpus format back, strictly.
pub fn read_corpus(reader: impl Read) -> Result<Vec<CorpusRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| DatasetError::InvalidRecord { line: i + 1, reason };
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let parse_label = |s: &str| BinLabel::parse(s).map_err(|e| bad(e.to_string()));
        let record = if value.get("messages").is_some() {
            let chat: ChatLine = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
            let prompt = chat
                .messages
                .iter()
                .find(|m| m.role == "user")
                .ok_or_else(|| bad("no user message".into()))?;
            let label = match chat.messages.iter().find(|m| m.role == "assistant") {
                Some(m) => Some(parse_label(&m.content)?),
                None => None,
            };
            CorpusRecord {
                id: chat.id,
                split: chat.split,
                prompt_text: prompt.content.clone(),
                label,
            }
        } else {
            let c: CompletionLine = serde_json::from_value(value).map_err(|e| bad(e.to_string()))?;
            CorpusRecord {
                id: c.id,
                split: c.split,
                prompt_text: c.prompt,
                label: c.completion.as_deref().map(parse_label).transpose()?,
            }
        };
        out.push(record);
    }
    Ok(out)
}

/// What a prediction source produced for one id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Label(BinLabel),
    Unparseable { raw: String },
}

impl Outcome {
    pub fn label(&self) -> Option<BinLabel> {
        match self {
            Outcome::Label(l) => Some(*l),
            Outcome::Unparseable { .. } => None,
        }
    }

    pub fn from_completion(text: &str) -> Outcome {
        match parse_completion(text) {
            Ok(l) => Outcome::Label(l),
            Err(_) => Outcome::Unparseable { raw: text.to_string() },
        }
    }
}

#[derive(Deserialize)]
struct PredictionLine {
    id: String,
    completion: serde_json::Value,
}

/// Pulls the `"id"` string out of a line that is not valid JSON.
fn recover_id(line: &str) -> Option<String> {
    let after_key = &line[line.find("\"id\"")? + 4..];
    let rest = after_key.trim_start().strip_prefix(':')?.trim_start().strip_prefix('"')?;
    let mut id = String::new();
    let mut chars = rest.chars();
    while let Some(c) = chars.next() {
        match c {
            '"' => return Some(id),
            '\\' => id.push(chars.next()?),
            c => id.push(c),
        }
    }
    None
}

/// Reads `{"id", "completion"}` lines for exactly the `expected` ids.
///
/// Ids are strict: an id outside `expected` or repeated is an error. Text is
/// lenient: a completion that does not parse, a line that is not valid JSON
/// but still names its id, and an expected id with no line at all are all
/// recorded as [`Outcome::Unparseable`].
pub fn read_predictions(reader: impl Read, expected: &[String]) -> Result<BTreeMap<String, Outcome>, DatasetError> {
    let known: HashSet<&str> = expected.iter().map(|s| s.as_str()).collect();
    let mut out: BTreeMap<String, Outcome> = BTreeMap::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, outcome) = match serde_json::from_str::<PredictionLine>(&line) {
            Ok(p) => {
                let outcome = match &p.completion {
                    serde_json::Value::String(s) => Outcome::from_completion(s),
                    serde_json::Value::Number(n) => Outcome::from_completion(&n.to_string()),
                    other => Outcome::Unparseable { raw: other.to_string() },
                };
                (p.id, outcome)
            }
            Err(_) => match recover_id(&line) {
                Some(id) => (id, Outcome::Unparseable { raw: line.clone() }),
                None => {
                    log::warn!("predictions line {} names no id; ignored", i + 1);
                    continue;
                }
            },
        };
        if !known.contains(id.as_str()) {
            return Err(DatasetError::UnknownId(id));
        }
        if out.insert(id.clone(), outcome).is_some() {
            return Err(DatasetError::DuplicateId(id));
        }
    }
    for id in expected {
        out.entry(id.clone())
            .or_insert_with(|| Outcome::Unparseable { raw: String::new() });
    }
    Ok(out)
}

pub fn import_predictions(path: &Path, expected: &[String]) -> Result<BTreeMap<String, Outcome>, DatasetError> {
    read_predictions(std::fs::File::open(path)?, expected)
}
