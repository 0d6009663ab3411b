//! Message ingestion: canonical JSONL, 4chan-style thread dumps and labeled
//! datasets.

mod chan;
mod jsonl;
mod markup;

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Language;

pub use chan::parse_chan_thread;
pub use jsonl::{parse_jsonl, parse_message_line, to_jsonl, to_jsonl_line, ParsedMessages};
pub use markup::clean_markup;

/// Binary aggression label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Neutral = 0,
    Aggressive = 1,
}

impl Label {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        match i {
            0 => Some(Label::Neutral),
            1 => Some(Label::Aggressive),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Neutral => "neutral",
            Label::Aggressive => "aggressive",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One imageboard post with markup already stripped from `text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMessage {
    pub id: String,
    pub board: String,
    pub thread_id: String,
    /// Unix seconds, 0 when unknown.
    pub timestamp: i64,
    pub text: String,
    pub label: Option<Label>,
}

impl RawMessage {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        RawMessage {
            id: id.into(),
            board: String::new(),
            thread_id: String::new(),
            timestamp: 0,
            text: text.into(),
            label: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }
}

/// A line that could not be parsed; parsing continued past it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub line: usize,
    pub reason: String,
}

/// Hand-annotated messages of one language, every one labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    language: Language,
    messages: Vec<RawMessage>,
}

impl LabeledDataset {
    /// Validates labels, id uniqueness and class coverage.
    pub fn new(language: Language, messages: Vec<RawMessage>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(messages.len());
        let mut classes = [false; 2];
        for (i, m) in messages.iter().enumerate() {
            if m.id.is_empty() {
                return Err(Error::format(i + 1, "empty id"));
            }
            if !seen.insert(m.id.as_str()) {
                return Err(Error::DuplicateId(m.id.clone()));
            }
            match m.label {
                Some(l) => classes[l.index()] = true,
                None => return Err(Error::Unlabeled(i + 1)),
            }
        }
        if !(classes[0] && classes[1]) {
            return Err(Error::DegenerateLabels);
        }
        Ok(LabeledDataset { language, messages })
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn messages(&self) -> &[RawMessage] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn label_of(&self, i: usize) -> Label {
        self.messages[i].label.expect("validated on construction")
    }

    pub fn into_messages(self) -> Vec<RawMessage> {
        self.messages
    }
}

/// Loads a labeled JSONL file. Malformed lines land in the returned skip
/// report; a well-formed line without a label is an error.
pub fn load_labeled(path: &Path, language: Language) -> Result<(LabeledDataset, Vec<SkipRecord>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse_jsonl(std::io::BufReader::new(file))?;
    if let Some(pos) = parsed.messages.iter().position(|m| m.label.is_none()) {
        return Err(Error::Unlabeled(parsed.lines[pos]));
    }
    let dataset = LabeledDataset::new(language, parsed.messages)?;
    Ok((dataset, parsed.skipped))
}
