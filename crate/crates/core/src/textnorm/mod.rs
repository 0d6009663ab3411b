//! Text normalization: tokenize, drop stopwords, stem, merge collocations.

mod phrases;
pub mod stem;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Language;

pub use phrases::{learn_phrases, PhraseCounter, PhraseModel, DEFAULT_PHRASE_MIN_COUNT, DEFAULT_PHRASE_THRESHOLD};
pub use stem::stem;

/// Token sequence of one message after normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedDoc {
    pub message_id: String,
    pub language: Language,
    pub tokens: Vec<String>,
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits text into lowercase runs of letters. A single apostrophe between
/// two letters stays inside the token (normalized to `'`); everything else,
/// digits included, separates tokens.
pub fn tokenize(text: &str, _language: Language) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c.is_alphabetic() {
            current.extend(c.to_lowercase());
        } else if is_apostrophe(c)
            && !current.is_empty()
            && chars.peek().is_some_and(|n| n.is_alphabetic())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Lowercase surface forms removed before stemming.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    language: Language,
    words: HashSet<String>,
}

impl StopwordList {
    pub fn new(language: Language, words: impl IntoIterator<Item = String>) -> Result<Self> {
        let words: HashSet<String> = words.into_iter().map(|w| w.to_lowercase()).collect();
        if words.is_empty() {
            return Err(Error::Config(format!("empty stopword list for {language}")));
        }
        Ok(StopwordList { language, words })
    }

    /// Parses the list file format: one word per line, `#` starts a comment.
    pub fn parse(language: Language, text: &str) -> Result<Self> {
        Self::new(language, parse_word_list(text))
    }

    pub fn load(language: Language, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(language, &text)
    }

    /// The list shipped with the crate.
    pub fn embedded(language: Language) -> Self {
        let text = match language {
            Language::En => include_str!("../../data/stopwords/en.txt"),
            Language::Ru => include_str!("../../data/stopwords/ru.txt"),
        };
        Self::parse(language, text).expect("embedded list is nonempty")
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    /// The list in file format, words sorted.
    pub fn to_text(&self) -> String {
        let mut words: Vec<&str> = self.words.iter().map(String::as_str).collect();
        words.sort_unstable();
        let mut out = format!("# stopwords ({})\n", self.language.code());
        for w in words {
            out.push_str(w);
            out.push('\n');
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Lines of a word-list file with `#` comments and blanks dropped.
pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn remove_stopwords(tokens: Vec<String>, stoplist: &StopwordList) -> Vec<String> {
    tokens.into_iter().filter(|t| !stoplist.contains(t)).collect()
}

/// Everything before phrase merging: tokenize, drop stopwords, stem.
pub fn base_tokens(text: &str, language: Language, stoplist: &StopwordList) -> Vec<String> {
    remove_stopwords(tokenize(text, language), stoplist)
        .iter()
        .map(|t| stem(t, language))
        .collect()
}

pub fn normalize_pipeline(
    text: &str,
    language: Language,
    stoplist: &StopwordList,
    phrase_model: Option<&PhraseModel>,
) -> Vec<String> {
    let tokens = base_tokens(text, language, stoplist);
    match phrase_model {
        Some(m) => m.apply(&tokens),
        None => tokens,
    }
}

/// Bundles the normalization settings of one language.
#[derive(Debug, Clone)]
pub struct Normalizer {
    pub language: Language,
    pub stoplist: StopwordList,
    pub phrases: Option<PhraseModel>,
}

impl Normalizer {
    pub fn new(language: Language, stoplist: StopwordList, phrases: Option<PhraseModel>) -> Self {
        Normalizer {
            language,
            stoplist,
            phrases,
        }
    }

    pub fn normalize(&self, message_id: &str, text: &str) -> NormalizedDoc {
        NormalizedDoc {
            message_id: message_id.to_owned(),
            language: self.language,
            tokens: normalize_pipeline(text, self.language, &self.stoplist, self.phrases.as_ref()),
        }
    }
}
