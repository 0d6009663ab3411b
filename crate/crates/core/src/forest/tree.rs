use rand::seq::index::sample;
use rand::Rng;

use super::ForestConfig;
use crate::corpus::Label;

/// A node of a [`DecisionTree`]. Samples with `x[feature] <= threshold` go
/// left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [u64; 2],
    },
}

/// Binary CART tree stored as a node array with the root at index 0. Every
/// child index is greater than its parent's.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub(crate) nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    /// Class counts of the leaf that `x` falls into.
    pub fn leaf_counts(&self, x: &[f64]) -> [u64; 2] {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Majority class of the leaf; a tie votes neutral.
    pub fn predict(&self, x: &[f64]) -> Label {
        let [c0, c1] = self.leaf_counts(x);
        if c1 > c0 {
            Label::Aggressive
        } else {
            Label::Neutral
        }
    }

    /// Class counts reaching every node, derived from the leaves.
    pub fn node_counts(&self) -> Vec<[u64; 2]> {
        let mut counts = vec![[0u64; 2]; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            counts[i] = match self.nodes[i] {
                Node::Leaf { counts } => counts,
                Node::Split { left, right, .. } => [counts[left][0] + counts[right][0], counts[left][1] + counts[right][1]],
            };
        }
        counts
    }

    /// Weighted impurity decrease per feature, normalized to sum 1; all zero
    /// for a single-leaf tree.
    pub fn importances(&self, n_features: usize) -> Vec<f64> {
        let counts = self.node_counts();
        let total = (counts[0][0] + counts[0][1]) as f64;
        let mut imp = vec![0.0; n_features];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { feature, left, right, .. } = *node {
                let n = (counts[i][0] + counts[i][1]) as f64;
                let nl = (counts[left][0] + counts[left][1]) as f64;
                let nr = (counts[right][0] + counts[right][1]) as f64;
                let decrease = gini(counts[i]) - nl / n * gini(counts[left]) - nr / n * gini(counts[right]);
                imp[feature] += n / total * decrease;
            }
        }
        let sum: f64 = imp.iter().sum();
        if sum > 0.0 {
            imp.iter_mut().for_each(|v| *v /= sum);
        }
        imp
    }
}

pub(crate) fn gini(c: [u64; 2]) -> f64 {
    let n = (c[0] + c[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c[0] as f64 / n, c[1] as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Chosen split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Gini impurity decrease.
    pub decrease: f64,
}

/// Midpoint of two consecutive distinct values that still separates them.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo / 2.0 + hi / 2.0;
    if m < hi && m >= lo {
        m
    } else {
        lo
    }
}

/// Split score numerator and denominator: `(a²+b²)/nl + (c²+d²)/nr` as a
/// fraction, compared exactly.
fn score(left: [u64; 2], right: [u64; 2]) -> (u128, u128) {
    let sq = |c: [u64; 2]| (c[0] as u128).pow(2) + (c[1] as u128).pow(2);
    let (nl, nr) = ((left[0] + left[1]) as u128, (right[0] + right[1]) as u128);
    (sq(left) * nr + sq(right) * nl, nl * nr)
}

/// Best Gini split over `features` for the multiset `samples`.
///
/// Candidates are midpoints between consecutive distinct values. Ties go to
/// the lower feature index, then the lower threshold. `None` when nothing
/// decreases impurity.
pub fn best_split(x: &[Vec<f64>], y: &[Label], samples: &[usize], features: &[usize]) -> Option<Split> {
    best_split_min_leaf(x, y, samples, features, 1)
}

pub(crate) fn best_split_min_leaf(
    x: &[Vec<f64>],
    y: &[Label],
    samples: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    if samples.len() < 2 {
        return None;
    }
    let mut total = [0u64; 2];
    for &i in samples {
        total[y[i].index()] += 1;
    }
    let n = samples.len() as u128;
    let parent = (total[0] as u128).pow(2) + (total[1] as u128).pow(2);
    let min_leaf = min_leaf.max(1) as u64;

    let mut order: Vec<usize> = features.to_vec();
    order.sort_unstable();
    order.dedup();

    // (num, den, feature, threshold)
    let mut best: Option<(u128, u128, usize, f64)> = None;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(samples.len());
    for &f in &order {
        column.clear();
        column.extend(samples.iter().map(|&i| (x[i][f], y[i].index())));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = [0u64; 2];
        for k in 0..column.len() - 1 {
            left[column[k].1] += 1;
            let (lo, hi) = (column[k].0, column[k + 1].0);
            if lo == hi {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            if left[0] + left[1] < min_leaf || right[0] + right[1] < min_leaf {
                continue;
            }
            let (num, den) = score(left, right);
            // impurity must strictly decrease: num/den > parent/n
            if num * n <= parent * den {
                continue;
            }
            let better = match best {
                None => true,
                Some((bn, bd, _, _)) => num * bd > bn * den,
            };
            if better {
                best = Some((num, den, f, midpoint(lo, hi)));
            }
        }
    }
    best.map(|(num, den, feature, threshold)| {
        let n = n as f64;
        Split {
            feature,
            threshold,
            decrease: num as f64 / den as f64 / n - parent as f64 / (n * n),
        }
    })
}

/// Grows one tree on the bootstrap multiset `samples`.
pub fn train_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[Label],
    samples: &[usize],
    config: &ForestConfig,
    rng: &mut R,
) -> DecisionTree {
    let n_features = x.first().map_or(0, Vec::len);
    let mtry = config.mtry.min(n_features).max(1);
    let min_leaf = config.min_samples_leaf.max(1);
    let mut nodes = vec![Node::Leaf { counts: [0; 2] }];
    // (node index, depth, samples)
    let mut work = vec![(0usize, 0usize, samples.to_vec())];
    while let Some((id, depth, s)) = work.pop() {
        let mut counts = [0u64; 2];
        for &i in &s {
            counts[y[i].index()] += 1;
        }
        let can_split = config.max_depth.is_none_or(|d| depth < d) && s.len() >= 2 * min_leaf && n_features > 0;
        let split = if can_split {
            let mut feats = sample(rng, n_features, mtry).into_vec();
            feats.sort_unstable();
            best_split_min_leaf(x, y, &s, &feats, min_leaf)
        } else {
            None
        };
        match split {
            None => nodes[id] = Node::Leaf { counts },
            Some(sp) => {
                let (left, right) = (nodes.len(), nodes.len() + 1);
                nodes.push(Node::Leaf { counts: [0; 2] });
                nodes.push(Node::Leaf { counts: [0; 2] });
                nodes[id] = Node::Split {
                    feature: sp.feature,
                    threshold: sp.threshold,
                    left,
                    right,
                };
                let (ls, rs): (Vec<usize>, Vec<usize>) = s.iter().partition(|&&i| x[i][sp.feature] <= sp.threshold);
                work.push((right, depth + 1, rs));
                work.push((left, depth + 1, ls));
            }
        }
    }
    DecisionTree { nodes }
}
