//! Seeded synthetic corpora with a planted aggressive cluster, used for
//! end-to-end checks and demos.
//!
//! The vocabulary holds 60 pseudo-words: 2 seeds, a 10-word cluster that
//! co-occurs with them, and 48 neutral words. Aggressive messages contain
//! 2 to 4 cluster words and, half of the time, a seed; neutral messages
//! contain neutral words only. Every word is its own stem and no word is a
//! stopword, so normalization leaves the text intact.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{to_jsonl, Label, RawMessage};
use crate::embedding::TrainConfig;
use crate::error::{Error, Result};
use crate::lang::Language;
use crate::pipeline::PipelineConfig;
use crate::textnorm::{stem, StopwordList};

pub const N_SEEDS: usize = 2;
pub const N_CLUSTER: usize = 10;
pub const N_NEUTRAL: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticVocab {
    pub seeds: Vec<String>,
    pub cluster: Vec<String>,
    pub neutral: Vec<String>,
}

impl SyntheticVocab {
    pub fn generate(rng_seed: u64) -> Self {
        const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
        const VOWELS: [&str; 4] = ["a", "o", "u", "i"];
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let stop = StopwordList::embedded(Language::En);
        let total = N_SEEDS + N_CLUSTER + N_NEUTRAL;
        let mut seen = HashSet::new();
        let mut words = Vec::with_capacity(total);
        while words.len() < total {
            let syllables = rng.gen_range(2..=3);
            let w: String = (0..syllables)
                .map(|_| format!("{}{}", ONSETS.choose(&mut rng).unwrap(), VOWELS.choose(&mut rng).unwrap()))
                .collect();
            if stem(&w, Language::En) == w && !stop.contains(&w) && seen.insert(w.clone()) {
                words.push(w);
            }
        }
        let neutral = words.split_off(N_SEEDS + N_CLUSTER);
        let cluster = words.split_off(N_SEEDS);
        SyntheticVocab {
            seeds: words,
            cluster,
            neutral,
        }
    }

    fn message(&self, label: Label, rng: &mut ChaCha8Rng) -> String {
        let len = rng.gen_range(6..=12);
        let mut tokens: Vec<&str> = Vec::with_capacity(len);
        if label == Label::Aggressive {
            let k = rng.gen_range(2..=4);
            tokens.extend((0..k).map(|_| self.cluster.choose(rng).unwrap().as_str()));
            if rng.gen_bool(0.5) {
                tokens.push(self.seeds.choose(rng).unwrap());
            }
        }
        while tokens.len() < len {
            tokens.push(self.neutral.choose(rng).unwrap());
        }
        tokens.shuffle(rng);
        tokens.join(" ")
    }

    /// `n` messages, half of each class, in shuffled order.
    pub fn messages(&self, n: usize, id_prefix: &str, labeled: bool, rng_seed: u64) -> Vec<RawMessage> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut labels: Vec<Label> = (0..n).map(|i| if i < n / 2 { Label::Aggressive } else { Label::Neutral }).collect();
        labels.shuffle(&mut rng);
        labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                let mut m = RawMessage::new(format!("{id_prefix}-{i}"), self.message(l, &mut rng));
                m.board = "syn".into();
                m.thread_id = format!("{}", i / 50);
                if labeled {
                    m.label = Some(l);
                }
                m
            })
            .collect()
    }
}

/// Sizes and seeds of a generated fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub rng_seed: u64,
    pub labeled: usize,
    pub corpus: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            rng_seed: 7,
            labeled: 2000,
            corpus: 4000,
        }
    }
}

/// Writes corpus, labeled set, seeds and `config.json` into `dir`, returning
/// the config (output under `dir/out`).
pub fn write_fixture(dir: &Path, spec: &FixtureSpec) -> Result<(PipelineConfig, SyntheticVocab)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let vocab = SyntheticVocab::generate(spec.rng_seed);
    let corpus = vocab.messages(spec.corpus, "c", false, spec.rng_seed.wrapping_add(1));
    let labeled = vocab.messages(spec.labeled, "l", true, spec.rng_seed.wrapping_add(2));
    let write_jsonl = |name: &str, msgs: &[RawMessage]| -> Result<PathBuf> {
        let p = dir.join(name);
        let f = std::fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        to_jsonl(std::io::BufWriter::new(f), msgs).map_err(|e| Error::io(&p, e))?;
        Ok(p)
    };
    let corpus_path = write_jsonl("corpus.jsonl", &corpus)?;
    let labeled_path = write_jsonl("labeled.jsonl", &labeled)?;
    let seed_path = dir.join("seeds.txt");
    std::fs::write(&seed_path, vocab.seeds.join("\n") + "\n").map_err(|e| Error::io(&seed_path, e))?;

    let mut config = PipelineConfig::new(Language::En, vec![corpus_path], labeled_path, seed_path);
    config.embedding = TrainConfig {
        dim: 32,
        epochs: 5,
        noise_table_size: 1_000_000,
        ..TrainConfig::default()
    };
    config.output_dir = dir.join("out");
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, config.to_json() + "\n").map_err(|e| Error::io(&cfg_path, e))?;
    Ok((config, vocab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnorm::base_tokens;

    #[test]
    fn vocabulary_shape() {
        let v = SyntheticVocab::generate(1);
        assert_eq!((v.seeds.len(), v.cluster.len(), v.neutral.len()), (2, 10, 48));
        let all: HashSet<&String> = v.seeds.iter().chain(&v.cluster).chain(&v.neutral).collect();
        assert_eq!(all.len(), 60);
        assert_eq!(v, SyntheticVocab::generate(1));
    }

    #[test]
    fn messages_follow_the_recipe() {
        let v = SyntheticVocab::generate(3);
        let stop = StopwordList::embedded(Language::En);
        let msgs = v.messages(200, "m", true, 4);
        assert_eq!(msgs.iter().filter(|m| m.label == Some(Label::Aggressive)).count(), 100);
        for m in &msgs {
            let toks = base_tokens(&m.text, Language::En, &stop);
            assert_eq!(toks.join(" "), m.text);
            assert!((6..=12).contains(&toks.len()));
            let in_cluster = toks.iter().filter(|t| v.cluster.contains(t)).count();
            let seeds = toks.iter().filter(|t| v.seeds.contains(t)).count();
            if m.label == Some(Label::Aggressive) {
                assert!((2..=4).contains(&in_cluster) && seeds <= 1);
            } else {
                assert_eq!(in_cluster + seeds, 0);
            }
        }
    }
}
