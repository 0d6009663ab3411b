use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embedding::TrainConfig;
use crate::error::{Error, Result};
use crate::features::SeedAggregation;
use crate::forest::ForestConfig;
use crate::lang::Language;
use crate::textnorm::{DEFAULT_PHRASE_MIN_COUNT, DEFAULT_PHRASE_THRESHOLD};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhraseSettings {
    pub min_count: u64,
    pub threshold: f64,
}

impl Default for PhraseSettings {
    fn default() -> Self {
        PhraseSettings {
            min_count: DEFAULT_PHRASE_MIN_COUNT,
            threshold: DEFAULT_PHRASE_THRESHOLD,
        }
    }
}

fn default_split_ratio() -> f64 {
    0.9
}

fn default_true() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_workers() -> usize {
    1
}

/// Everything one train/evaluate run needs. Relative paths are resolved
/// against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub language: Language,
    /// Keep only messages from this board; all boards when absent.
    #[serde(default)]
    pub board: Option<String>,
    /// Unlabeled JSONL corpora for phrase learning and embedding training.
    pub corpus_paths: Vec<PathBuf>,
    pub labeled_path: PathBuf,
    /// Built-in list for the language when absent.
    #[serde(default)]
    pub stopword_path: Option<PathBuf>,
    pub seed_path: PathBuf,
    #[serde(default)]
    pub phrases: PhraseSettings,
    #[serde(default)]
    pub embedding: TrainConfig,
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default = "default_split_ratio")]
    pub split_ratio: f64,
    #[serde(default)]
    pub split_seed: u64,
    /// Split each class separately; `false` shuffles the whole set.
    #[serde(default = "default_true")]
    pub stratify: bool,
    #[serde(default)]
    pub seed_aggregation: SeedAggregation,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Threads for every stage; overrides `embedding.workers`.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl PipelineConfig {
    /// A config with defaults for everything but the required fields.
    pub fn new(language: Language, corpus_paths: Vec<PathBuf>, labeled_path: PathBuf, seed_path: PathBuf) -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            language,
            board: None,
            corpus_paths,
            labeled_path,
            stopword_path: None,
            seed_path,
            phrases: PhraseSettings::default(),
            embedding: TrainConfig::default(),
            forest: ForestConfig::default(),
            split_ratio: default_split_ratio(),
            split_seed: 0,
            stratify: true,
            seed_aggregation: SeedAggregation::Min,
            output_dir: default_output_dir(),
            workers: 1,
        }
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus_paths.iter_mut().for_each(fix);
        fix(&mut self.labeled_path);
        fix(&mut self.seed_path);
        if let Some(p) = self.stopword_path.as_mut() {
            fix(p);
        }
        fix(&mut self.output_dir);
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config("split_ratio must lie strictly between 0 and 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if !(self.phrases.threshold.is_finite()) {
            return Err(Error::Config("phrases.threshold must be finite".into()));
        }
        self.effective_embedding().validate()?;
        self.forest.validate()
    }

    /// Embedding settings with the pipeline worker count applied.
    pub fn effective_embedding(&self) -> TrainConfig {
        TrainConfig {
            workers: self.workers,
            ..self.embedding.clone()
        }
    }

    /// Replaces the embedding, forest and split seeds.
    pub fn override_seed(&mut self, seed: u64) {
        self.embedding.rng_seed = seed;
        self.forest.rng_seed = seed;
        self.split_seed = seed;
    }

    /// Fails with the field name when a referenced input is missing.
    pub fn require(&self, field: &str) -> Result<()> {
        let check = |f: &str, p: &Path| {
            if p.exists() {
                Ok(())
            } else {
                Err(Error::MissingPath {
                    field: f.to_owned(),
                    path: p.to_path_buf(),
                })
            }
        };
        match field {
            "corpus_paths" => {
                if self.corpus_paths.is_empty() {
                    return Err(Error::Config("corpus_paths is empty".into()));
                }
                for (i, p) in self.corpus_paths.iter().enumerate() {
                    check(&format!("corpus_paths[{i}]"), p)?;
                }
                Ok(())
            }
            "labeled_path" => check(field, &self.labeled_path),
            "seed_path" => check(field, &self.seed_path),
            "stopword_path" => match &self.stopword_path {
                Some(p) => check(field, p),
                None => Ok(()),
            },
            other => Err(Error::InvalidArgument(format!("unknown path field {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"version":1,"language":"en","corpus_paths":["c.jsonl"],"labeled_path":"l.jsonl","seed_path":"s.txt"}"#;

    #[test]
    fn defaults_and_resolution() {
        let cfg = PipelineConfig::from_json(MINIMAL, Path::new("/data")).unwrap();
        assert_eq!(cfg.labeled_path, Path::new("/data/l.jsonl"));
        assert_eq!(cfg.output_dir, Path::new("/data/out"));
        assert_eq!(cfg.split_ratio, 0.9);
        assert!(cfg.stratify);
        assert_eq!(cfg.seed_aggregation, SeedAggregation::Min);
        assert_eq!(cfg.forest.n_trees, 100);
        assert_eq!(cfg.embedding.dim, 100);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = MINIMAL.replace("\"version\":1", "\"version\":1,\"split_ration\":0.5");
        assert!(matches!(PipelineConfig::from_json(&text, Path::new(".")), Err(Error::Config(_))));
        let nested = MINIMAL.replace("\"version\":1", "\"version\":1,\"embedding\":{\"dims\":3}");
        assert!(PipelineConfig::from_json(&nested, Path::new(".")).is_err());
    }

    #[test]
    fn invariants() {
        for bad in [
            MINIMAL.replace("\"version\":1", "\"version\":2"),
            MINIMAL.replace("\"version\":1", "\"version\":1,\"split_ratio\":1.0"),
            MINIMAL.replace("\"version\":1", "\"version\":1,\"forest\":{\"n_trees\":0}"),
            MINIMAL.replace("\"version\":1", "\"version\":1,\"seed_aggregation\":\"max\""),
        ] {
            let err = PipelineConfig::from_json(&bad, Path::new(".")).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn missing_paths_name_the_field() {
        let cfg = PipelineConfig::from_json(MINIMAL, Path::new("/nonexistent")).unwrap();
        match cfg.require("seed_path") {
            Err(Error::MissingPath { field, .. }) => assert_eq!(field, "seed_path"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_override() {
        let mut cfg = PipelineConfig::from_json(MINIMAL, Path::new(".")).unwrap();
        cfg.override_seed(42);
        assert_eq!((cfg.embedding.rng_seed, cfg.forest.rng_seed, cfg.split_seed), (42, 42, 42));
    }
}
