//! Random forest of Gini CART trees with bootstrap sampling and
//! mean-decrease-in-impurity feature importances.

mod json;
mod tree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::N_FEATURES;
use crate::seed;

pub use tree::{best_split, train_tree, DecisionTree, Node, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn per node; capped at the number of features.
    pub mtry: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub rng_seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            mtry: 3,
            max_depth: None,
            min_samples_leaf: 1,
            rng_seed: 1,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("forest: n_trees must be at least 1".into()));
        }
        if !(1..=N_FEATURES).contains(&self.mtry) {
            return Err(Error::Config(format!("forest: mtry must be in 1..={N_FEATURES}")));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("forest: min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    n_features: usize,
    config: ForestConfig,
    trees: Vec<DecisionTree>,
    importances: Vec<f64>,
    degenerate: bool,
}

/// Forest output for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Fraction of trees voting aggressive.
    pub score: f64,
}

impl RandomForest {
    pub(crate) fn from_trees(n_features: usize, config: ForestConfig, trees: Vec<DecisionTree>) -> Self {
        let (importances, degenerate) = forest_importances(&trees, n_features);
        RandomForest {
            n_features,
            config,
            trees,
            importances,
            degenerate,
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    /// Normalized importances, one per feature.
    pub fn importances(&self) -> &[f64] {
        &self.importances
    }

    /// True when no tree contains a split; importances are then all zero.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Majority vote of the trees; an even split votes neutral.
    pub fn predict(&self, x: &[f64]) -> Prediction {
        let ones = self.trees.iter().filter(|t| t.predict(x) == Label::Aggressive).count();
        let zeros = self.trees.len() - ones;
        Prediction {
            label: if ones > zeros { Label::Aggressive } else { Label::Neutral },
            score: ones as f64 / self.trees.len() as f64,
        }
    }

    pub fn predict_all(&self, x: &[Vec<f64>]) -> Vec<Prediction> {
        x.par_iter().map(|r| self.predict(r)).collect()
    }
}

/// Mean of per-tree normalized importances, renormalized; the flag reports a
/// forest without any split.
fn forest_importances(trees: &[DecisionTree], n_features: usize) -> (Vec<f64>, bool) {
    let mut imp = vec![0.0; n_features];
    for t in trees {
        for (a, b) in imp.iter_mut().zip(t.importances(n_features)) {
            *a += b;
        }
    }
    let sum: f64 = imp.iter().sum();
    if sum > 0.0 {
        imp.iter_mut().for_each(|v| *v /= sum);
        (imp, false)
    } else {
        (imp, true)
    }
}

pub fn feature_importances(forest: &RandomForest) -> &[f64] {
    forest.importances()
}

/// Checks shape and returns the feature count.
fn check_data(x: &[Vec<f64>], y: &[Label]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples".into()));
    }
    let n_features = x[0].len();
    if !(1..=N_FEATURES).contains(&n_features) {
        return Err(Error::InvalidArgument(format!("{n_features} features; expected 1..={N_FEATURES}")));
    }
    for (i, r) in x.iter().enumerate() {
        if r.len() != n_features {
            return Err(Error::DimensionMismatch {
                left: n_features,
                right: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("row {i} has a non-finite value")));
        }
    }
    if !(y.contains(&Label::Neutral) && y.contains(&Label::Aggressive)) {
        return Err(Error::DegenerateLabels);
    }
    Ok(n_features)
}

fn tree_rng(rng_seed: u64, t: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed::derive(rng_seed, &[t as u64]))
}

/// Trains `config.n_trees` trees on `workers` threads. The result depends
/// only on the data and `config`.
pub fn train_forest(x: &[Vec<f64>], y: &[Label], config: &ForestConfig, workers: usize) -> Result<RandomForest> {
    config.validate()?;
    let n_features = check_data(x, y)?;
    let n = x.len();
    let grow = |t: usize| {
        let mut rng = tree_rng(config.rng_seed, t);
        let boot: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        train_tree(x, y, &boot, config, &mut rng)
    };
    let trees: Vec<DecisionTree> = if workers <= 1 {
        (0..config.n_trees).map(grow).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| (0..config.n_trees).into_par_iter().map(grow).collect())
    };
    Ok(RandomForest::from_trees(n_features, config.clone(), trees))
}
