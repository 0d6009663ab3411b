//! Collocation detection over adjacent token pairs.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PHRASE_MIN_COUNT: u64 = 5;
pub const DEFAULT_PHRASE_THRESHOLD: f64 = 10.0;

/// Unigram and adjacent-bigram counts. Counters over corpus shards merge
/// associatively.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhraseCounter {
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<String, HashMap<String, u64>>,
}

impl PhraseCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_doc<S: AsRef<str>>(&mut self, tokens: &[S]) {
        for t in tokens {
            *self.unigrams.entry(t.as_ref().to_owned()).or_insert(0) += 1;
        }
        for pair in tokens.windows(2) {
            *self
                .bigrams
                .entry(pair[0].as_ref().to_owned())
                .or_default()
                .entry(pair[1].as_ref().to_owned())
                .or_insert(0) += 1;
        }
    }

    pub fn merge(mut self, other: PhraseCounter) -> PhraseCounter {
        for (t, c) in other.unigrams {
            *self.unigrams.entry(t).or_insert(0) += c;
        }
        for (a, inner) in other.bigrams {
            let slot = self.bigrams.entry(a).or_default();
            for (b, c) in inner {
                *slot.entry(b).or_insert(0) += c;
            }
        }
        self
    }

    pub fn finish(self, min_count: u64, threshold: f64) -> Result<PhraseModel> {
        if self.unigrams.is_empty() {
            return Err(Error::NoTokens);
        }
        PhraseModel::validate_params(min_count, threshold)?;
        Ok(PhraseModel {
            min_count,
            threshold,
            vocab_size: self.unigrams.len() as u64,
            unigrams: self.unigrams,
            bigrams: self.bigrams,
        })
    }
}

/// Counts adjacent pairs over a corpus of already stopword-filtered and
/// stemmed documents.
pub fn learn_phrases<I, D>(docs: I, min_count: u64, threshold: f64) -> Result<PhraseModel>
where
    I: IntoIterator<Item = D>,
    D: AsRef<[String]>,
{
    let mut counter = PhraseCounter::new();
    for d in docs {
        counter.add_doc(d.as_ref());
    }
    counter.finish(min_count, threshold)
}

/// A learned collocation model. `(a, b)` is a phrase when
/// `(count(ab) - min_count) * vocab_size / (count(a) * count(b)) >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseModel {
    min_count: u64,
    threshold: f64,
    vocab_size: u64,
    unigrams: HashMap<String, u64>,
    bigrams: HashMap<String, HashMap<String, u64>>,
}

impl PhraseModel {
    fn validate_params(min_count: u64, threshold: f64) -> Result<()> {
        if min_count < 1 {
            return Err(Error::Config("phrase min_count must be >= 1".into()));
        }
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::Config("phrase threshold must be a positive number".into()));
        }
        Ok(())
    }

    /// Builds a model from explicit counts, checking the count invariants.
    pub fn from_counts(
        min_count: u64,
        threshold: f64,
        vocab_size: u64,
        unigrams: impl IntoIterator<Item = (String, u64)>,
        bigrams: impl IntoIterator<Item = (String, String, u64)>,
    ) -> Result<Self> {
        Self::validate_params(min_count, threshold)?;
        let mut uni = HashMap::new();
        for (t, c) in unigrams {
            if c == 0 {
                return Err(Error::format(None, format!("unigram {t:?} has count 0")));
            }
            if uni.insert(t.clone(), c).is_some() {
                return Err(Error::format(None, format!("unigram {t:?} listed twice")));
            }
        }
        if vocab_size < uni.len() as u64 {
            return Err(Error::format(None, "vocab_size is smaller than the unigram table"));
        }
        let mut bi: HashMap<String, HashMap<String, u64>> = HashMap::new();
        for (a, b, c) in bigrams {
            if c == 0 {
                return Err(Error::format(None, format!("bigram ({a:?}, {b:?}) has count 0")));
            }
            if !uni.contains_key(&a) || !uni.contains_key(&b) {
                return Err(Error::format(None, format!("bigram ({a:?}, {b:?}) has an unknown part")));
            }
            if bi.entry(a.clone()).or_default().insert(b.clone(), c).is_some() {
                return Err(Error::format(None, format!("bigram ({a:?}, {b:?}) listed twice")));
            }
        }
        Ok(PhraseModel {
            min_count,
            threshold,
            vocab_size,
            unigrams: uni,
            bigrams: bi,
        })
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn vocab_size(&self) -> u64 {
        self.vocab_size
    }

    pub fn unigram_count(&self, t: &str) -> u64 {
        self.unigrams.get(t).copied().unwrap_or(0)
    }

    pub fn bigram_count(&self, a: &str, b: &str) -> u64 {
        self.bigrams.get(a).and_then(|m| m.get(b)).copied().unwrap_or(0)
    }

    /// Collocation score of the pair, `None` when the pair was never seen.
    pub fn score(&self, a: &str, b: &str) -> Option<f64> {
        let ab = self.bigram_count(a, b);
        if ab == 0 {
            return None;
        }
        let (ca, cb) = (self.unigram_count(a), self.unigram_count(b));
        Some((ab as f64 - self.min_count as f64) * self.vocab_size as f64 / (ca as f64 * cb as f64))
    }

    pub fn is_phrase(&self, a: &str, b: &str) -> bool {
        self.score(a, b).is_some_and(|s| s >= self.threshold)
    }

    /// One greedy left-to-right pass merging qualifying pairs into `a_b`.
    pub fn apply<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let a = tokens[i].as_ref();
            if let Some(b) = tokens.get(i + 1).map(AsRef::as_ref) {
                if self.is_phrase(a, b) {
                    out.push(format!("{a}_{b}"));
                    i += 2;
                    continue;
                }
            }
            out.push(a.to_owned());
            i += 1;
        }
        out
    }

    /// All qualifying pairs, sorted.
    pub fn phrases(&self) -> Vec<(String, String)> {
        let mut out: Vec<_> = self
            .bigrams
            .iter()
            .flat_map(|(a, m)| m.keys().map(move |b| (a, b)))
            .filter(|(a, b)| self.is_phrase(a, b))
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        out.sort();
        out
    }

    pub fn to_json(&self) -> String {
        let unigrams: BTreeMap<&str, u64> = self.unigrams.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut bigrams: Vec<(&str, &str, u64)> = self
            .bigrams
            .iter()
            .flat_map(|(a, m)| m.iter().map(move |(b, c)| (a.as_str(), b.as_str(), *c)))
            .collect();
        bigrams.sort();
        let wire = WireOut {
            min_count: self.min_count,
            threshold: self.threshold,
            vocab_size: self.vocab_size,
            unigrams: unigrams.into_iter().collect(),
            bigrams,
        };
        serde_json::to_string(&wire).expect("plain struct serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: WireIn =
            serde_json::from_str(text).map_err(|e| Error::format(e.line(), format!("phrase model: {e}")))?;
        Self::from_counts(wire.min_count, wire.threshold, wire.vocab_size, wire.unigrams, wire.bigrams)
    }
}

#[derive(Serialize)]
struct WireOut<'a> {
    min_count: u64,
    threshold: f64,
    vocab_size: u64,
    unigrams: Vec<(&'a str, u64)>,
    bigrams: Vec<(&'a str, &'a str, u64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WireIn {
    min_count: u64,
    threshold: f64,
    vocab_size: u64,
    unigrams: Vec<(String, u64)>,
    bigrams: Vec<(String, String, u64)>,
}
