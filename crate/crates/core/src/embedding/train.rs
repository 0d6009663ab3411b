use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::build_noise_table;
use super::sgns::{update, Scratch, SharedMatrix};
use super::{build_vocab, EmbeddingModel, Vocabulary};
use crate::error::{Error, Result};
use crate::seed;

/// Skip-gram trainer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_min: f64,
    pub min_count: u64,
    /// Frequent-token downsampling threshold; 0 keeps every token.
    pub subsample_threshold: f64,
    pub noise_exponent: f64,
    pub noise_table_size: usize,
    pub rng_seed: u64,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr_start: 0.025,
            lr_min: 1e-4,
            min_count: 5,
            subsample_threshold: 1e-3,
            noise_exponent: 0.75,
            noise_table_size: 10_000_000,
            rng_seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("embedding: {m}")));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.window == 0 {
            return bad("window must be at least 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be at least 1");
        }
        if !(self.lr_min > 0.0 && self.lr_start.is_finite() && self.lr_min < self.lr_start) {
            return bad("need 0 < lr_min < lr_start");
        }
        if !(self.subsample_threshold >= 0.0 && self.subsample_threshold.is_finite()) {
            return bad("subsample_threshold must be a finite value >= 0");
        }
        if !self.noise_exponent.is_finite() {
            return bad("noise_exponent must be finite");
        }
        if self.noise_table_size == 0 {
            return bad("noise_table_size must be at least 1");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        Ok(())
    }
}

/// Summary of one training epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean loss per trained (center, context) pair.
    pub mean_loss: f64,
    pub pairs: u64,
    /// Learning rate at the end of the epoch.
    pub lr: f64,
}

pub fn train_sgns<D: AsRef<[String]>>(docs: &[D], config: &TrainConfig) -> Result<(EmbeddingModel, Vec<EpochStats>)> {
    train_sgns_with_progress(docs, config, |_| {})
}

/// Trains skip-gram vectors, calling `progress` after every epoch.
pub fn train_sgns_with_progress<D: AsRef<[String]>>(
    docs: &[D],
    config: &TrainConfig,
    mut progress: impl FnMut(&EpochStats),
) -> Result<(EmbeddingModel, Vec<EpochStats>)> {
    config.validate()?;
    let vocab = build_vocab(docs, config.min_count)?;
    let table_size = config.noise_table_size.max(vocab.len());
    let table = build_noise_table(&vocab, config.noise_exponent, table_size)?;
    let encoded: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| d.as_ref().iter().filter_map(|t| vocab.index_of(t).map(|i| i as u32)).collect())
        .collect();

    let dim = config.dim;
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let half = 0.5 / dim as f64;
    let input: Vec<f64> = (0..vocab.len() * dim).map(|_| init_rng.gen_range(-half..=half)).collect();
    let output = vec![0.0; vocab.len() * dim];

    let positions: u64 = encoded.iter().map(|d| d.len() as u64).sum();
    let ctx = Context {
        input: SharedMatrix::from_vec(input, dim),
        output: SharedMatrix::from_vec(output, dim),
        keep: keep_probabilities(&vocab, config.subsample_threshold),
        noise_tokens: distinct_sorted(&table),
        table,
        config,
        processed: AtomicU64::new(0),
        planned: (config.epochs as u64 * positions).max(1),
    };

    let shards = shard(&encoded, config.workers);
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let results: Vec<(f64, u64)> = if shards.len() == 1 {
            vec![ctx.run(shards[0], epoch, 0)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(w, docs)| {
                        let ctx = &ctx;
                        s.spawn(move || ctx.run(docs, epoch, w))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
            })
        };
        let (loss, pairs) = results.iter().fold((0.0, 0), |(l, p), r| (l + r.0, p + r.1));
        let stats = EpochStats {
            epoch: epoch + 1,
            mean_loss: if pairs == 0 { 0.0 } else { loss / pairs as f64 },
            pairs,
            lr: ctx.lr(ctx.processed.load(Ordering::Relaxed)),
        };
        progress(&stats);
        history.push(stats);
    }

    let model = EmbeddingModel::from_parts(vocab, dim, ctx.input.into_vec(), ctx.output.into_vec());
    Ok((model, history))
}

struct Context<'a> {
    input: SharedMatrix,
    output: SharedMatrix,
    keep: Option<Vec<f64>>,
    table: Vec<u32>,
    noise_tokens: Vec<u32>,
    config: &'a TrainConfig,
    processed: AtomicU64,
    planned: u64,
}

impl Context<'_> {
    fn lr(&self, processed: u64) -> f64 {
        let c = self.config;
        let frac = (processed as f64 / self.planned as f64).min(1.0);
        (c.lr_start - (c.lr_start - c.lr_min) * frac).max(c.lr_min)
    }

    /// True when the table holds a token other than both `a` and `b`.
    fn has_negative(&self, a: usize, b: usize) -> bool {
        self.noise_tokens.len() > 2 || self.noise_tokens.iter().any(|&t| t as usize != a && t as usize != b)
    }

    fn run(&self, docs: &[Vec<u32>], epoch: usize, worker: usize) -> (f64, u64) {
        let c = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(c.rng_seed, &[epoch as u64, worker as u64]));
        let mut scratch = Scratch::new(c.dim);
        let mut negs = Vec::with_capacity(c.negatives);
        let mut kept = Vec::new();
        let (mut loss, mut pairs) = (0.0, 0u64);
        for doc in docs {
            let before = self.processed.fetch_add(doc.len() as u64, Ordering::Relaxed);
            let lr = self.lr(before);
            kept.clear();
            match &self.keep {
                Some(p) => kept.extend(doc.iter().copied().filter(|&t| rng.gen::<f64>() < p[t as usize])),
                None => kept.extend_from_slice(doc),
            }
            for i in 0..kept.len() {
                let b = rng.gen_range(1..=c.window);
                let lo = i.saturating_sub(b);
                let hi = (i + b).min(kept.len() - 1);
                for j in (lo..=hi).filter(|&j| j != i) {
                    let (center, context) = (kept[i] as usize, kept[j] as usize);
                    negs.clear();
                    if self.has_negative(center, context) {
                        while negs.len() < c.negatives {
                            let t = self.table[rng.gen_range(0..self.table.len())] as usize;
                            if t != context && t != center {
                                negs.push(t);
                            }
                        }
                    }
                    loss += update(&self.input, &self.output, center, context, &negs, lr, &mut scratch);
                    pairs += 1;
                }
            }
        }
        (loss, pairs)
    }
}

/// Per-token keep probability `min(1, sqrt(t / f))`, or `None` when
/// subsampling is off.
fn keep_probabilities(vocab: &Vocabulary, threshold: f64) -> Option<Vec<f64>> {
    if threshold <= 0.0 {
        return None;
    }
    let total = vocab.total_tokens() as f64;
    Some(
        vocab
            .counts()
            .iter()
            .map(|&c| (threshold / (c as f64 / total)).sqrt().min(1.0))
            .collect(),
    )
}

fn distinct_sorted(table: &[u32]) -> Vec<u32> {
    let mut v = table.to_vec();
    v.dedup();
    v
}

/// Splits documents into at most `workers` contiguous shards of similar token
/// counts.
fn shard(docs: &[Vec<u32>], workers: usize) -> Vec<&[Vec<u32>]> {
    if workers <= 1 || docs.len() <= 1 {
        return vec![docs];
    }
    let total: usize = docs.iter().map(Vec::len).sum();
    let target = total.div_ceil(workers).max(1);
    let mut out = Vec::with_capacity(workers);
    let (mut start, mut acc) = (0, 0);
    for (i, d) in docs.iter().enumerate() {
        acc += d.len();
        if acc >= target && out.len() + 1 < workers {
            out.push(&docs[start..=i]);
            start = i + 1;
            acc = 0;
        }
    }
    if start < docs.len() {
        out.push(&docs[start..]);
    }
    out
}
