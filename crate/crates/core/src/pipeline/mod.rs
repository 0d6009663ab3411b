//! End-to-end orchestration: config, train/test split, bundle training,
//! evaluation and batch classification.

mod config;
mod report;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{load_labeled, parse_jsonl, parse_message_line, Label, LabeledDataset, RawMessage, SkipRecord};
use crate::embedding::{load_text, save_text, train_sgns_with_progress, EmbeddingModel, EpochStats};
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureVector, SeedAggregation, SeedSet, FEATURE_NAMES};
use crate::forest::{train_forest, Prediction, RandomForest};
use crate::lang::Language;
use crate::textnorm::{base_tokens, PhraseCounter, PhraseModel, StopwordList};

pub use config::{PhraseSettings, PipelineConfig, CONFIG_VERSION};
pub use report::{group_importances, ClassMetrics, EvalReport, NamedValue, IMPORTANCE_GROUPS};

pub const BUNDLE_VERSION: u32 = 1;

pub const PHRASES_FILE: &str = "phrases.json";
pub const EMBEDDING_FILE: &str = "embedding.txt";
pub const FOREST_FILE: &str = "forest.json";
pub const SEEDS_FILE: &str = "seeds.txt";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const REPORT_TEXT_FILE: &str = "report.txt";

const BUNDLE_FILES: [&str; 5] = [PHRASES_FILE, EMBEDDING_FILE, FOREST_FILE, SEEDS_FILE, STOPWORDS_FILE];

/// Progress events from the long-running stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Progress {
    Stage(&'static str),
    Epoch(EpochStats),
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Stratified or plain split of label indices into sorted (train, test)
/// lists. Each class keeps `floor(ratio * n)` members for training, clamped
/// so both sides get at least one.
pub fn split_labels(labels: &[Label], ratio: f64, seed: u64, stratify: bool) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config("split ratio must lie strictly between 0 and 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<(&'static str, Vec<usize>)> = if stratify {
        [Label::Neutral, Label::Aggressive]
            .into_iter()
            .map(|l| (l.as_str(), (0..labels.len()).filter(|&i| labels[i] == l).collect()))
            .collect()
    } else {
        vec![("all", (0..labels.len()).collect())]
    };
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (name, mut idx) in groups {
        let n = idx.len();
        if n < 2 {
            return Err(Error::TooFewSamples { class: name, count: n });
        }
        idx.shuffle(&mut rng);
        let k = ((ratio * n as f64).floor() as usize).clamp(1, n - 1);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split_train_test(
    dataset: &LabeledDataset,
    ratio: f64,
    seed: u64,
    stratify: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let labels: Vec<Label> = (0..dataset.len()).map(|i| dataset.label_of(i)).collect();
    split_labels(&labels, ratio, seed, stratify)
}

pub fn load_stopwords(config: &PipelineConfig) -> Result<StopwordList> {
    config.require("stopword_path")?;
    match &config.stopword_path {
        Some(p) => StopwordList::load(config.language, p),
        None => Ok(StopwordList::embedded(config.language)),
    }
}

/// Unlabeled corpus messages, board-filtered, with the number of skipped
/// lines.
pub fn load_corpus(config: &PipelineConfig) -> Result<(Vec<RawMessage>, usize)> {
    config.require("corpus_paths")?;
    let mut messages = Vec::new();
    let mut skipped = 0;
    for path in &config.corpus_paths {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let parsed = parse_jsonl(std::io::BufReader::new(file)).map_err(|e| match e {
            Error::Format { line, message } => Error::format(line, format!("{}: {message}", path.display())),
            e => e,
        })?;
        skipped += parsed.skipped.len();
        messages.extend(
            parsed
                .messages
                .into_iter()
                .filter(|m| config.board.as_ref().is_none_or(|b| &m.board == b)),
        );
    }
    Ok((messages, skipped))
}

/// Stopword-filtered, stemmed tokens of every text, in parallel.
pub fn base_token_docs<S: AsRef<str> + Sync>(
    texts: &[S],
    language: Language,
    stoplist: &StopwordList,
    workers: usize,
) -> Result<Vec<Vec<String>>> {
    Ok(pool(workers)?.install(|| texts.par_iter().map(|t| base_tokens(t.as_ref(), language, stoplist)).collect()))
}

pub fn learn_phrase_model(docs: &[Vec<String>], settings: &PhraseSettings) -> Result<PhraseModel> {
    let mut counter = PhraseCounter::new();
    for d in docs {
        counter.add_doc(d);
    }
    counter.finish(settings.min_count, settings.threshold)
}

pub fn apply_phrases(docs: &[Vec<String>], phrases: &PhraseModel, workers: usize) -> Result<Vec<Vec<String>>> {
    Ok(pool(workers)?.install(|| docs.par_iter().map(|d| phrases.apply(d)).collect()))
}

/// Corpus statistics recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub corpus_messages: usize,
    pub corpus_skipped: usize,
    pub labeled_messages: usize,
    pub labeled_skipped: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub phrases: usize,
    pub vocab_size: usize,
    pub epochs: Vec<EpochStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    pub language: Language,
    pub board: Option<String>,
    pub seed_aggregation: SeedAggregation,
    /// SHA-256 (hex) of every artifact file.
    pub files: BTreeMap<String, String>,
    pub summary: TrainSummary,
}

impl Manifest {
    pub fn artifact_version(&self) -> String {
        format!("aggrodetect-bundle/{} ({})", self.version, env!("CARGO_PKG_VERSION"))
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Normalized labeled messages and their features.
struct Featurized {
    dataset: LabeledDataset,
    skipped: usize,
    features: Vec<FeatureVector>,
}

fn featurize_labeled(
    config: &PipelineConfig,
    stoplist: &StopwordList,
    phrases: &PhraseModel,
    extractor: &FeatureExtractor<'_>,
    subset: impl FnOnce(&LabeledDataset) -> Result<Vec<usize>>,
) -> Result<(Featurized, Vec<usize>)> {
    let (dataset, skipped) = load_labeled(&config.labeled_path, config.language)?;
    let idx = subset(&dataset)?;
    let texts: Vec<&str> = idx.iter().map(|&i| dataset.messages()[i].text.as_str()).collect();
    let base = base_token_docs(&texts, config.language, stoplist, config.workers)?;
    let docs = apply_phrases(&base, phrases, config.workers)?;
    let items: Vec<(&[String], &str)> = docs.iter().map(Vec::as_slice).zip(texts.iter().copied()).collect();
    let features = pool(config.workers)?.install(|| extractor.extract_all(&items));
    Ok((
        Featurized {
            dataset,
            skipped: skipped.len(),
            features,
        },
        idx,
    ))
}

/// Trains phrases, embedding and forest and writes the bundle into
/// `config.output_dir`.
pub fn run_train(config: &PipelineConfig, mut progress: impl FnMut(Progress)) -> Result<Manifest> {
    config.validate()?;
    for field in ["corpus_paths", "labeled_path", "seed_path", "stopword_path"] {
        config.require(field)?;
    }
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    progress(Progress::Stage("inputs"));
    let stoplist = load_stopwords(config).map_err(|e| e.in_stage("inputs"))?;
    let seeds = SeedSet::load(config.language, &config.seed_path).map_err(|e| e.in_stage("inputs"))?;

    progress(Progress::Stage("ingest"));
    let (corpus, corpus_skipped) = load_corpus(config).map_err(|e| e.in_stage("ingest"))?;

    progress(Progress::Stage("normalize"));
    let texts: Vec<&str> = corpus.iter().map(|m| m.text.as_str()).collect();
    let base = base_token_docs(&texts, config.language, &stoplist, config.workers).map_err(|e| e.in_stage("normalize"))?;

    progress(Progress::Stage("phrases"));
    let phrases = learn_phrase_model(&base, &config.phrases).map_err(|e| e.in_stage("phrases"))?;
    let docs = apply_phrases(&base, &phrases, config.workers)?;
    drop(base);

    progress(Progress::Stage("embedding"));
    let (trained, epochs) = train_sgns_with_progress(&docs, &config.effective_embedding(), |s| progress(Progress::Epoch(*s)))
        .map_err(|e| e.in_stage("embedding"))?;
    drop(docs);
    let emb_path = out.join(EMBEDDING_FILE);
    save_text(&trained, &emb_path).map_err(|e| e.in_stage("embedding"))?;
    drop(trained);
    // features are computed from the saved vectors, exactly as a loaded bundle sees them
    let model = load_text(&emb_path).map_err(|e| e.in_stage("embedding"))?;

    progress(Progress::Stage("seeds"));
    let extractor = FeatureExtractor::new(&model, &seeds, config.seed_aggregation).map_err(|e| e.in_stage("seeds"))?;

    progress(Progress::Stage("features"));
    let (feat, train_idx) = featurize_labeled(config, &stoplist, &phrases, &extractor, |ds| {
        Ok(split_train_test(ds, config.split_ratio, config.split_seed, config.stratify)?.0)
    })
    .map_err(|e| e.in_stage("features"))?;
    let n_train = train_idx.len();
    let n_test = feat.dataset.len() - n_train;

    progress(Progress::Stage("forest"));
    let x: Vec<Vec<f64>> = feat.features.iter().map(|f| f.values.to_vec()).collect();
    let y: Vec<Label> = train_idx.iter().map(|&i| feat.dataset.label_of(i)).collect();
    let forest = train_forest(&x, &y, &config.forest, config.workers).map_err(|e| e.in_stage("forest"))?;

    progress(Progress::Stage("write"));
    write_file(&out.join(PHRASES_FILE), &phrases.to_json())?;
    write_file(&out.join(FOREST_FILE), &forest.to_json())?;
    write_file(&out.join(SEEDS_FILE), &seeds.to_text())?;
    write_file(&out.join(STOPWORDS_FILE), &stoplist.to_text())?;
    let mut files = BTreeMap::new();
    for name in BUNDLE_FILES {
        files.insert(name.to_owned(), sha256_file(&out.join(name))?);
    }
    let manifest = Manifest {
        version: BUNDLE_VERSION,
        language: config.language,
        board: config.board.clone(),
        seed_aggregation: config.seed_aggregation,
        files,
        summary: TrainSummary {
            corpus_messages: corpus.len(),
            corpus_skipped,
            labeled_messages: feat.dataset.len(),
            labeled_skipped: feat.skipped,
            n_train,
            n_test,
            phrases: phrases.phrases().len(),
            vocab_size: model.len(),
            epochs,
        },
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_file(&out.join(MANIFEST_FILE), &text)?;
    Ok(manifest)
}

/// A trained model bundle loaded from disk.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub stoplist: StopwordList,
    pub phrases: PhraseModel,
    pub embedding: EmbeddingModel,
    pub forest: RandomForest,
    pub seeds: SeedSet,
}

impl Bundle {
    /// Loads a bundle, checking every file against the manifest hashes.
    pub fn load(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let p = dir.join(name);
            std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
        };
        let manifest: Manifest = serde_json::from_str(&read(MANIFEST_FILE)?)
            .map_err(|e| Error::format(e.line(), format!("manifest: {e}")))?;
        if manifest.version != BUNDLE_VERSION {
            return Err(Error::format(None, format!("unsupported bundle version {}", manifest.version)));
        }
        for name in BUNDLE_FILES {
            let want = manifest
                .files
                .get(name)
                .ok_or_else(|| Error::format(None, format!("manifest lists no {name}")))?;
            if &sha256_file(&dir.join(name))? != want {
                return Err(Error::format(None, format!("{name} does not match its manifest hash")));
            }
        }
        let lang = manifest.language;
        let bundle = Bundle {
            dir: dir.to_path_buf(),
            stoplist: StopwordList::parse(lang, &read(STOPWORDS_FILE)?)?,
            phrases: PhraseModel::from_json(&read(PHRASES_FILE)?)?,
            embedding: load_text(&dir.join(EMBEDDING_FILE))?,
            forest: RandomForest::from_json(&read(FOREST_FILE)?)?,
            seeds: SeedSet::parse(lang, &read(SEEDS_FILE)?)?,
            manifest,
        };
        bundle.extractor()?;
        Ok(bundle)
    }

    pub fn language(&self) -> Language {
        self.manifest.language
    }

    pub fn extractor(&self) -> Result<FeatureExtractor<'_>> {
        FeatureExtractor::new(&self.embedding, &self.seeds, self.manifest.seed_aggregation)
    }

    pub fn tokens(&self, text: &str) -> Vec<String> {
        self.phrases.apply(&base_tokens(text, self.language(), &self.stoplist))
    }

    pub fn classify_text(&self, text: &str) -> Result<(Prediction, FeatureVector)> {
        let f = self.extractor()?.extract(&self.tokens(text), text);
        Ok((self.forest.predict(&f.values), f))
    }
}

/// Predicts the test split of `config` with `bundle`.
pub fn run_evaluate(config: &PipelineConfig, bundle: &Bundle) -> Result<EvalReport> {
    config.validate()?;
    config.require("labeled_path")?;
    if config.language != bundle.language() {
        return Err(Error::Config(format!(
            "config language {} does not match bundle language {}",
            config.language,
            bundle.language()
        )));
    }
    let extractor = bundle.extractor()?;
    let mut n_train = 0;
    let (feat, test_idx) = featurize_labeled(config, &bundle.stoplist, &bundle.phrases, &extractor, |ds| {
        let (train, test) = split_train_test(ds, config.split_ratio, config.split_seed, config.stratify)?;
        n_train = train.len();
        Ok(test)
    })
    .map_err(|e| e.in_stage("evaluate"))?;
    if test_idx.is_empty() {
        return Err(Error::InvalidArgument("empty test split".into()));
    }
    let x: Vec<Vec<f64>> = feat.features.iter().map(|f| f.values.to_vec()).collect();
    let predicted: Vec<Label> = bundle.forest.predict_all(&x).into_iter().map(|p| p.label).collect();
    let truth: Vec<Label> = test_idx.iter().map(|&i| feat.dataset.label_of(i)).collect();
    let (accuracy, confusion, per_class) = EvalReport::metrics(&truth, &predicted);
    let raw = bundle.forest.importances();
    Ok(EvalReport {
        artifact_version: bundle.manifest.artifact_version(),
        language: config.language,
        board: config.board.clone(),
        n_train,
        n_test: test_idx.len(),
        accuracy,
        confusion,
        per_class,
        grouped_importances: group_importances(raw),
        raw_importances: FEATURE_NAMES
            .iter()
            .zip(raw)
            .map(|(n, &v)| NamedValue {
                name: (*n).to_owned(),
                value: v,
            })
            .collect(),
        importances_degenerate: bundle.forest.is_degenerate(),
        config: config.clone(),
    })
}

/// Writes `report.json` and `report.txt` into `dir`.
pub fn write_report(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join(REPORT_JSON_FILE), &report.to_json())?;
    write_file(&dir.join(REPORT_TEXT_FILE), &report.to_table())
}

#[derive(Serialize)]
struct ClassifiedLine<'a> {
    id: &'a str,
    label: Label,
    score: f64,
    in_vocab_count: usize,
}

/// Classifies JSONL messages from `input`, one output line per well-formed
/// input line, in order. Malformed lines are returned as skip records.
pub fn run_classify<R: BufRead, W: Write>(bundle: &Bundle, mut input: R, mut output: W) -> Result<Vec<SkipRecord>> {
    let extractor = bundle.extractor()?;
    let mut skipped = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf).map_err(|e| Error::io("<input>", e))? == 0 {
            break;
        }
        line_no += 1;
        let parsed = std::str::from_utf8(&buf)
            .map_err(|_| "invalid UTF-8".to_owned())
            .and_then(|line| if line.trim().is_empty() { Err(String::new()) } else { parse_message_line(line) });
        let msg = match parsed {
            Ok(m) => m,
            Err(reason) if reason.is_empty() => continue,
            Err(reason) => {
                skipped.push(SkipRecord { line: line_no, reason });
                continue;
            }
        };
        let f = extractor.extract(&bundle.tokens(&msg.text), &msg.text);
        let p = bundle.forest.predict(&f.values);
        let line = ClassifiedLine {
            id: &msg.id,
            label: p.label,
            score: p.score,
            in_vocab_count: f.in_vocab_count,
        };
        serde_json::to_writer(&mut output, &line).map_err(|e| Error::io("<output>", e.into()))?;
        output.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    output.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n0: usize, n1: usize) -> Vec<Label> {
        let mut v = vec![Label::Neutral; n0];
        v.extend(vec![Label::Aggressive; n1]);
        v
    }

    #[test]
    fn ten_samples_split_four_four_one_one() {
        let y = labels(5, 5);
        let (train, test) = split_labels(&y, 0.9, 3, true).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        assert_eq!(test.iter().filter(|&&i| y[i] == Label::Aggressive).count(), 1);
    }

    #[test]
    fn both_sides_keep_one_per_class() {
        let y = labels(2, 30);
        let (train, test) = split_labels(&y, 0.99, 0, true).unwrap();
        assert_eq!(test.iter().filter(|&&i| y[i] == Label::Neutral).count(), 1);
        assert_eq!(train.iter().filter(|&&i| y[i] == Label::Neutral).count(), 1);
        let (train, _) = split_labels(&y, 0.01, 0, true).unwrap();
        assert_eq!(train.len(), 2);
    }

    #[test]
    fn lone_class_member_is_an_error() {
        let err = split_labels(&labels(1, 9), 0.9, 0, true).unwrap_err();
        assert!(matches!(err, Error::TooFewSamples { class: "neutral", count: 1 }));
        assert_eq!(err.exit_code(), 4);
        assert!(split_labels(&labels(1, 9), 0.9, 0, false).is_ok());
    }

    proptest! {
        #[test]
        fn split_is_an_exact_partition(n0 in 2usize..60, n1 in 2usize..60, ratio in 0.01f64..0.99, seed in any::<u64>(), stratify in any::<bool>()) {
            let y = labels(n0, n1);
            let (train, test) = split_labels(&y, ratio, seed, stratify).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
            prop_assert!(!train.is_empty() && !test.is_empty());
            prop_assert_eq!(split_labels(&y, ratio, seed, stratify).unwrap(), (train.clone(), test));
            if stratify {
                let want = |n: usize| ((ratio * n as f64).floor() as usize).clamp(1, n - 1);
                prop_assert_eq!(train.len(), want(n0) + want(n1));
            }
        }
    }
}
