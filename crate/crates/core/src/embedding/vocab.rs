use std::collections::HashMap;

use crate::error::{Error, Result};

/// Token inventory of an embedding model.
///
/// Indices run over `0..len()` in descending count order, ties broken
/// lexicographically. Models loaded from vector files carry no counts; their
/// entries report count 0 and keep file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, i: usize) -> &str {
        &self.tokens[i]
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Sum of retained counts.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub(crate) fn from_ordered(tokens: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        debug_assert_eq!(tokens.len(), counts.len());
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::format(None, format!("duplicate vocabulary token {t:?}")));
            }
        }
        let total_tokens = counts.iter().sum();
        Ok(Vocabulary {
            tokens,
            counts,
            index,
            total_tokens,
        })
    }
}

/// Counts tokens over `docs` and keeps those seen at least `min_count` times.
pub fn build_vocab<D: AsRef<[String]>>(docs: &[D], min_count: u64) -> Result<Vocabulary> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for d in docs {
        for t in d.as_ref() {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let (tokens, counts) = kept.into_iter().map(|(t, c)| (t.to_owned(), c)).unzip();
    Vocabulary::from_ordered(tokens, counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter().map(|d| d.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn count_order() {
        let v = build_vocab(&docs(&[&["a", "b", "a"]]), 1).unwrap();
        assert_eq!(v.tokens(), &["a", "b"]);
        assert_eq!(v.counts(), &[2, 1]);
        assert_eq!(v.total_tokens(), 3);
    }

    #[test]
    fn thinning() {
        let v = build_vocab(&docs(&[&["a", "b", "a"]]), 2).unwrap();
        assert_eq!(v.tokens(), &["a"]);
        assert_eq!(v.index_of("b"), None);
    }

    #[test]
    fn lexicographic_tie_break() {
        let v = build_vocab(&docs(&[&["b", "a"], &["a", "b"]]), 1).unwrap();
        assert_eq!(v.index_of("a"), Some(0));
        assert_eq!(v.index_of("b"), Some(1));
    }

    #[test]
    fn empty_vocabulary() {
        assert!(matches!(build_vocab(&docs(&[&["a"]]), 2), Err(Error::EmptyVocabulary)));
        assert!(matches!(build_vocab::<Vec<String>>(&[], 1), Err(Error::EmptyVocabulary)));
    }
}
