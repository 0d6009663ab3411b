//! Seed-distance and length features.
//!
//! Distances are cosine distances in the embedding. Each in-vocabulary
//! token is scored by its distance to the seed set (closest seed by default),
//! and a message is summarized by the range, extremes and mean of those
//! scores, statistics over token pairs, and word and message lengths.

mod kmeans;

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::lang::Language;
use crate::numfmt::format_sig;
use crate::textnorm::{parse_word_list, NormalizedDoc};

pub use kmeans::{kmeans, suggest_seeds, KMeans};

pub const N_FEATURES: usize = 12;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "dist_range",
    "dist_max",
    "dist_mean",
    "dist_min",
    "pair_mean",
    "pair_max",
    "pair_min",
    "wlen_mean",
    "wlen_max",
    "wlen_min",
    "msg_len_tokens",
    "msg_len_chars",
];

/// Distance reported for seed features when no token is in the vocabulary.
pub const NO_TOKEN_DISTANCE: f64 = 2.0;

/// Reference words in post-normalization form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSet {
    language: Language,
    seeds: Vec<String>,
}

impl SeedSet {
    pub fn new(language: Language, seeds: Vec<String>) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::Config("seed set is empty".into()));
        }
        let mut seen = HashSet::new();
        for s in &seeds {
            if s.is_empty() || s.contains(char::is_whitespace) {
                return Err(Error::Config(format!("invalid seed {s:?}")));
            }
            if !seen.insert(s.as_str()) {
                return Err(Error::Config(format!("duplicate seed {s:?}")));
            }
        }
        Ok(SeedSet { language, seeds })
    }

    /// One token per line, `#` comments.
    pub fn parse(language: Language, text: &str) -> Result<Self> {
        Self::new(language, parse_word_list(text))
    }

    pub fn load(language: Language, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(language, &text)
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub fn seeds(&self) -> &[String] {
        &self.seeds
    }

    /// Vocabulary indices of the seeds, or every missing seed as an error.
    pub fn indices(&self, model: &EmbeddingModel) -> Result<Vec<usize>> {
        let missing: Vec<String> = self.seeds.iter().filter(|s| model.index_of(s).is_none()).cloned().collect();
        if !missing.is_empty() {
            return Err(Error::OutOfVocabulary(missing));
        }
        Ok(self.seeds.iter().map(|s| model.index_of(s).expect("checked")).collect())
    }

    /// The seed file contents.
    pub fn to_text(&self) -> String {
        let mut out = format!("# seeds ({})\n", self.language.code());
        for s in &self.seeds {
            out.push_str(s);
            out.push('\n');
        }
        out
    }
}

/// How a token's distances to the individual seeds are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedAggregation {
    #[default]
    Min,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; N_FEATURES],
    /// Tokens found in the embedding vocabulary. Not a model input.
    pub in_vocab_count: usize,
}

impl FeatureVector {
    pub fn dist_range(&self) -> f64 {
        self.values[0]
    }
    pub fn dist_max(&self) -> f64 {
        self.values[1]
    }
    pub fn dist_mean(&self) -> f64 {
        self.values[2]
    }
    pub fn dist_min(&self) -> f64 {
        self.values[3]
    }
    pub fn pair_mean(&self) -> f64 {
        self.values[4]
    }
    pub fn pair_max(&self) -> f64 {
        self.values[5]
    }
    pub fn pair_min(&self) -> f64 {
        self.values[6]
    }
    pub fn wlen_mean(&self) -> f64 {
        self.values[7]
    }
    pub fn wlen_max(&self) -> f64 {
        self.values[8]
    }
    pub fn wlen_min(&self) -> f64 {
        self.values[9]
    }
    pub fn msg_len_tokens(&self) -> f64 {
        self.values[10]
    }
    pub fn msg_len_chars(&self) -> f64 {
        self.values[11]
    }
}

/// A model and validated seed set, ready to featurize messages.
#[derive(Debug, Clone)]
pub struct FeatureExtractor<'a> {
    model: &'a EmbeddingModel,
    seeds: Vec<usize>,
    aggregation: SeedAggregation,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(model: &'a EmbeddingModel, seeds: &SeedSet, aggregation: SeedAggregation) -> Result<Self> {
        Ok(FeatureExtractor {
            model,
            seeds: seeds.indices(model)?,
            aggregation,
        })
    }

    fn seed_distance(&self, i: usize) -> f64 {
        let d = self.seeds.iter().map(|&s| self.model.distance(i, s));
        match self.aggregation {
            SeedAggregation::Min => d.fold(f64::INFINITY, f64::min),
            SeedAggregation::Mean => d.sum::<f64>() / self.seeds.len() as f64,
        }
    }

    pub fn token_seed_distance(&self, token: &str) -> Result<f64> {
        let i = self
            .model
            .index_of(token)
            .ok_or_else(|| Error::OutOfVocabulary(vec![token.to_owned()]))?;
        Ok(self.seed_distance(i))
    }

    pub fn extract(&self, tokens: &[String], raw_text: &str) -> FeatureVector {
        let mut v = [0.0; N_FEATURES];
        let in_vocab: Vec<usize> = tokens.iter().filter_map(|t| self.model.index_of(t)).collect();

        if in_vocab.is_empty() {
            v[..4].fill(NO_TOKEN_DISTANCE);
        } else {
            let d: Vec<f64> = in_vocab.iter().map(|&i| self.seed_distance(i)).collect();
            let (lo, hi) = min_max(&d);
            v[0] = hi - lo;
            v[1] = hi;
            v[2] = mean(&d).clamp(lo, hi);
            v[3] = lo;
        }

        if in_vocab.len() >= 2 {
            let mut pairs = Vec::with_capacity(in_vocab.len() * (in_vocab.len() - 1) / 2);
            for (k, &a) in in_vocab.iter().enumerate() {
                for &b in &in_vocab[k + 1..] {
                    pairs.push(self.model.distance(a, b));
                }
            }
            let (lo, hi) = min_max(&pairs);
            v[4] = mean(&pairs).clamp(lo, hi);
            v[5] = hi;
            v[6] = lo;
        }

        if !tokens.is_empty() {
            let lens: Vec<f64> = tokens.iter().map(|t| t.chars().count() as f64).collect();
            let (lo, hi) = min_max(&lens);
            v[7] = mean(&lens).clamp(lo, hi);
            v[8] = hi;
            v[9] = lo;
        }
        v[10] = tokens.len() as f64;
        v[11] = raw_text.chars().count() as f64;

        FeatureVector {
            values: v,
            in_vocab_count: in_vocab.len(),
        }
    }

    pub fn extract_doc(&self, doc: &NormalizedDoc, raw_text: &str) -> FeatureVector {
        self.extract(&doc.tokens, raw_text)
    }

    /// Featurizes `(tokens, raw_text)` pairs in parallel, preserving order.
    pub fn extract_all(&self, items: &[(&[String], &str)]) -> Vec<FeatureVector> {
        items.par_iter().map(|(t, raw)| self.extract(t, raw)).collect()
    }
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Rounding can push a float mean one ulp outside [min, max]; callers clamp.
fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Distance from `token` to its closest seed.
pub fn token_seed_distance(model: &EmbeddingModel, token: &str, seeds: &SeedSet) -> Result<f64> {
    FeatureExtractor::new(model, seeds, SeedAggregation::Min)?.token_seed_distance(token)
}

pub fn extract_features(
    model: &EmbeddingModel,
    doc: &NormalizedDoc,
    seeds: &SeedSet,
    raw_text: &str,
) -> Result<FeatureVector> {
    Ok(FeatureExtractor::new(model, seeds, SeedAggregation::Min)?.extract_doc(doc, raw_text))
}

/// One row of a feature matrix export.
#[derive(Debug, Clone, Copy)]
pub struct FeatureRow<'a> {
    pub id: &'a str,
    pub features: &'a FeatureVector,
    pub label: Option<Label>,
}

/// Writes `id,f1,...,f12,in_vocab_count[,label]` CSV. The label column is
/// present when any row carries a label.
pub fn write_feature_csv<W: Write>(rows: &[FeatureRow<'_>], mut w: W) -> std::io::Result<()> {
    let with_label = rows.iter().any(|r| r.label.is_some());
    write!(w, "id")?;
    for i in 1..=N_FEATURES {
        write!(w, ",f{i}")?;
    }
    write!(w, ",in_vocab_count")?;
    if with_label {
        write!(w, ",label")?;
    }
    writeln!(w)?;
    for r in rows {
        write!(w, "{}", csv_field(r.id))?;
        for x in r.features.values {
            write!(w, ",{}", format_sig(x, 9))?;
        }
        write!(w, ",{}", r.features.in_vocab_count)?;
        if with_label {
            match r.label {
                Some(l) => write!(w, ",{}", l.index())?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn abc() -> EmbeddingModel {
        EmbeddingModel::from_vectors(toks(&["a", "b", "c"]), vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]])
            .unwrap()
    }

    #[test]
    fn seed_set_validation() {
        assert!(SeedSet::new(Language::En, vec![]).is_err());
        assert!(SeedSet::new(Language::En, toks(&["a", "a"])).is_err());
        let s = SeedSet::parse(Language::En, "# x\na\nzz\nyy\n").unwrap();
        assert!(matches!(s.indices(&abc()), Err(Error::OutOfVocabulary(m)) if m == ["zz", "yy"]));
        let round = SeedSet::parse(Language::En, &s.to_text()).unwrap();
        assert_eq!(round, s);
    }

    #[test]
    fn token_seed_distances() {
        let m = abc();
        let one = SeedSet::new(Language::En, toks(&["a"])).unwrap();
        let two = SeedSet::new(Language::En, toks(&["a", "b"])).unwrap();
        assert_eq!(token_seed_distance(&m, "a", &one).unwrap(), 0.0);
        assert!((token_seed_distance(&m, "c", &one).unwrap() - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert_eq!(token_seed_distance(&m, "b", &one).unwrap(), 1.0);
        assert_eq!(token_seed_distance(&m, "b", &two).unwrap(), 0.0);
        assert!(token_seed_distance(&m, "zz", &one).is_err());
    }

    #[test]
    fn seed_only_doc() {
        let m = abc();
        let seeds = SeedSet::new(Language::En, toks(&["a"])).unwrap();
        let f = FeatureExtractor::new(&m, &seeds, SeedAggregation::Min).unwrap().extract(&toks(&["a"]), "A");
        assert_eq!(&f.values[..7], &[0.0; 7]);
        assert_eq!(f.msg_len_tokens(), 1.0);
        assert_eq!(f.in_vocab_count, 1);
    }

    #[test]
    fn empty_doc() {
        let m = abc();
        let seeds = SeedSet::new(Language::En, toks(&["a"])).unwrap();
        let f = FeatureExtractor::new(&m, &seeds, SeedAggregation::Min).unwrap().extract(&[], "the of");
        assert_eq!(f.values, [2.0, 2.0, 2.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 6.0]);
    }

    #[test]
    fn out_of_vocabulary_tokens_count_for_lengths_only() {
        let m = abc();
        let seeds = SeedSet::new(Language::En, toks(&["a"])).unwrap();
        let f = FeatureExtractor::new(&m, &seeds, SeedAggregation::Min)
            .unwrap()
            .extract(&toks(&["zzzz", "ab_cd"]), "raw");
        assert_eq!(&f.values[..4], &[2.0; 4]);
        assert_eq!(f.wlen_mean(), 4.5);
        assert_eq!(f.wlen_max(), 5.0);
        assert_eq!(f.wlen_min(), 4.0);
        assert_eq!(f.in_vocab_count, 0);
    }

    #[test]
    fn csv_export() {
        let f = FeatureVector {
            values: [1.0 / 3.0; N_FEATURES],
            in_vocab_count: 2,
        };
        let rows = [
            FeatureRow {
                id: "m,1",
                features: &f,
                label: Some(Label::Aggressive),
            },
            FeatureRow {
                id: "m2",
                features: &f,
                label: None,
            },
        ];
        let mut buf = Vec::new();
        write_feature_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "id,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,f12,in_vocab_count,label");
        assert!(lines[1].starts_with("\"m,1\",0.333333333,"));
        assert!(lines[1].ends_with(",2,1"));
        assert!(lines[2].ends_with(",2,"));

        let mut buf = Vec::new();
        write_feature_csv(&rows[1..], &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("id,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,f12,in_vocab_count\n"));
    }
}
