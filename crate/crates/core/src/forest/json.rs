//! Forest serialization: splits as `[feature, threshold, left, right]`,
//! leaves as `[count0, count1]`.

use serde::{Deserialize, Serialize};

use super::{DecisionTree, ForestConfig, Node, RandomForest};
use crate::error::{Error, Result};
use crate::features::N_FEATURES;

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WireNode {
    Split(usize, f64, usize, usize),
    Leaf(u64, u64),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireForest {
    version: u32,
    n_features: usize,
    config: ForestConfig,
    trees: Vec<Vec<WireNode>>,
    importances: Vec<f64>,
}

impl RandomForest {
    pub fn to_json(&self) -> String {
        let wire = WireForest {
            version: FOREST_FORMAT_VERSION,
            n_features: self.n_features,
            config: self.config.clone(),
            trees: self
                .trees
                .iter()
                .map(|t| {
                    t.nodes
                        .iter()
                        .map(|n| match *n {
                            Node::Split {
                                feature,
                                threshold,
                                left,
                                right,
                            } => WireNode::Split(feature, threshold, left, right),
                            Node::Leaf { counts } => WireNode::Leaf(counts[0], counts[1]),
                        })
                        .collect()
                })
                .collect(),
            importances: self.importances.clone(),
        };
        serde_json::to_string(&wire).expect("forest serializes")
    }

    /// Parses and validates a serialized forest.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: WireForest =
            serde_json::from_str(text).map_err(|e| Error::format(e.line(), format!("forest: {e}")))?;
        let bad = |m: String| Err(Error::format(None, format!("forest: {m}")));
        if wire.version != FOREST_FORMAT_VERSION {
            return bad(format!("unsupported version {}", wire.version));
        }
        if !(1..=N_FEATURES).contains(&wire.n_features) {
            return bad(format!("n_features {} outside 1..={N_FEATURES}", wire.n_features));
        }
        wire.config.validate()?;
        if wire.trees.len() != wire.config.n_trees {
            return bad(format!("{} trees but n_trees = {}", wire.trees.len(), wire.config.n_trees));
        }
        let mut trees = Vec::with_capacity(wire.trees.len());
        for (t, nodes) in wire.trees.iter().enumerate() {
            let tree = check_tree(nodes, wire.n_features, wire.config.min_samples_leaf)
                .map_err(|m| Error::format(None, format!("forest: tree {t}: {m}")))?;
            trees.push(tree);
        }
        let forest = RandomForest::from_trees(wire.n_features, wire.config, trees);
        if wire.importances.len() != forest.n_features
            || forest
                .importances
                .iter()
                .zip(&wire.importances)
                .any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return bad("importances do not match the trees".into());
        }
        Ok(forest)
    }
}

fn check_tree(nodes: &[WireNode], n_features: usize, min_leaf: usize) -> std::result::Result<DecisionTree, String> {
    if nodes.is_empty() {
        return Err("no nodes".into());
    }
    let mut parents = vec![0usize; nodes.len()];
    let mut out = Vec::with_capacity(nodes.len());
    for (i, n) in nodes.iter().enumerate() {
        out.push(match *n {
            WireNode::Split(feature, threshold, left, right) => {
                if feature >= n_features {
                    return Err(format!("node {i}: feature {feature} out of range"));
                }
                if !threshold.is_finite() {
                    return Err(format!("node {i}: threshold must be finite"));
                }
                for c in [left, right] {
                    if c <= i || c >= nodes.len() {
                        return Err(format!("node {i}: invalid child {c}"));
                    }
                    parents[c] += 1;
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                }
            }
            WireNode::Leaf(c0, c1) => {
                match c0.checked_add(c1) {
                    Some(s) if s >= min_leaf as u64 => {}
                    _ => return Err(format!("node {i}: leaf holds fewer than {min_leaf} samples")),
                }
                Node::Leaf { counts: [c0, c1] }
            }
        });
    }
    if let Some(i) = (1..nodes.len()).find(|&i| parents[i] != 1) {
        return Err(format!("node {i} has {} parents", parents[i]));
    }
    let tree = DecisionTree { nodes: out };
    let total = tree.node_counts()[0];
    if total[0].checked_add(total[1]).is_none() {
        return Err("sample counts overflow".into());
    }
    Ok(tree)
}
