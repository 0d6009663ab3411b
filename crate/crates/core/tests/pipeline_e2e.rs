use std::path::Path;
use std::sync::OnceLock;

use aggrodetect::corpus::Label;
use aggrodetect::pipeline::{
    run_classify, run_evaluate, run_train, Bundle, Manifest, PipelineConfig, FOREST_FILE, MANIFEST_FILE,
};
use aggrodetect::synthetic::{write_fixture, FixtureSpec, SyntheticVocab};
use aggrodetect::Error;

struct Fixture {
    config: PipelineConfig,
    vocab: SyntheticVocab,
    manifest: Manifest,
    _dir: tempfile::TempDir,
}

/// One trained bundle shared by the read-only tests.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let (config, vocab) = write_fixture(dir.path(), &FixtureSpec::default()).unwrap();
        let manifest = run_train(&config, |_| {}).unwrap();
        Fixture {
            config,
            vocab,
            manifest,
            _dir: dir,
        }
    })
}

fn bundle() -> Bundle {
    Bundle::load(&fixture().config.output_dir).unwrap()
}

fn classify(input: &str) -> (Vec<serde_json::Value>, usize) {
    let mut out = Vec::new();
    let skipped = run_classify(&bundle(), input.as_bytes(), &mut out).unwrap();
    let lines = String::from_utf8(out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    (lines, skipped.len())
}

#[test]
fn bundle_is_complete_and_hashed() {
    let f = fixture();
    let dir = &f.config.output_dir;
    assert_eq!(f.manifest.files.len(), 5);
    for (name, hash) in &f.manifest.files {
        let bytes = std::fs::read(dir.join(name)).unwrap();
        use sha2::Digest;
        assert_eq!(&hex::encode(sha2::Sha256::digest(&bytes)), hash, "{name}");
    }
    let on_disk: Manifest = serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk, f.manifest);
    assert_eq!(f.manifest.summary.n_train, 1800);
    assert_eq!(f.manifest.summary.vocab_size, 60);
    assert_eq!(f.manifest.summary.epochs.len(), 5);
}

#[test]
fn rerun_gives_identical_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FixtureSpec {
        labeled: 200,
        corpus: 600,
        ..FixtureSpec::default()
    };
    let (mut config, _) = write_fixture(dir.path(), &spec).unwrap();
    config.forest.n_trees = 20;
    let a = run_train(&config, |_| {}).unwrap();
    config.output_dir = dir.path().join("again");
    let b = run_train(&config, |_| {}).unwrap();
    assert_eq!(a.files, b.files);
}

#[test]
fn tampered_bundle_is_rejected() {
    let src = &fixture().config.output_dir;
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(src).unwrap() {
        let p = entry.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    assert!(Bundle::load(dir.path()).is_ok());
    let forest = dir.path().join(FOREST_FILE);
    let text = std::fs::read_to_string(&forest).unwrap();
    std::fs::write(&forest, text.replacen("\"n_trees\":100", "\"n_trees\":100 ", 1)).unwrap();
    let err = Bundle::load(dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn missing_seed_file_names_the_field() {
    let mut config = fixture().config.clone();
    config.seed_path = Path::new("/nonexistent/seeds.txt").to_path_buf();
    match run_train(&config, |_| {}) {
        Err(Error::MissingPath { field, .. }) => assert_eq!(field, "seed_path"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn out_of_vocabulary_seeds_are_all_listed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = FixtureSpec {
        labeled: 100,
        corpus: 300,
        ..FixtureSpec::default()
    };
    let (config, vocab) = write_fixture(dir.path(), &spec).unwrap();
    std::fs::write(&config.seed_path, format!("{}\nqqqx\nzzzy\n", vocab.seeds[0])).unwrap();
    let err = run_train(&config, |_| {}).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "seeds", .. }), "{err}");
    match err.root() {
        Error::OutOfVocabulary(missing) => assert_eq!(missing, &["qqqx", "zzzy"]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn evaluation_counts_are_consistent() {
    let f = fixture();
    let report = run_evaluate(&f.config, &bundle()).unwrap();
    assert_eq!((report.n_train, report.n_test), (1800, 200));
    let c = report.confusion;
    assert_eq!(c.iter().flatten().sum::<u64>(), 200);
    assert_eq!(report.accuracy, (c[0][0] + c[1][1]) as f64 / 200.0);
    assert_eq!(report.raw_importances.len(), 12);
    let other: f64 = [3, 5, 6, 8, 9, 10, 11].iter().map(|&i| report.raw_importances[i].value).sum();
    assert!((report.grouped_importances[5].value - other).abs() < 1e-12);
    assert!(report.to_table().contains("Other parameters"));
}

#[test]
fn evaluation_rejects_another_language() {
    let mut config = fixture().config.clone();
    config.language = aggrodetect::Language::Ru;
    assert_eq!(run_evaluate(&config, &bundle()).unwrap_err().exit_code(), 2);
}

#[test]
fn classify_contracts() {
    let (lines, skipped) = classify("");
    assert!(lines.is_empty() && skipped == 0);

    let seed = &fixture().vocab.seeds[0];
    let input = format!(
        "{{\"id\":\"s\",\"text\":\"{seed} {seed} {seed} {seed}\"}}\nnot json\n\n{{\"id\":\"o\",\"text\":\"qqq www eee\"}}\n{{\"id\":\"e\",\"text\":\"\"}}\n"
    );
    let (lines, skipped) = classify(&input);
    assert_eq!(skipped, 1);
    let ids: Vec<&str> = lines.iter().map(|l| l["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["s", "o", "e"]);
    assert_eq!(lines[0]["label"], Label::Aggressive.as_str());
    assert!(lines[0]["score"].as_f64().unwrap() > 0.5);
    assert_eq!(lines[0]["in_vocab_count"], 4);
    assert_eq!(lines[1]["in_vocab_count"], 0);
    for l in &lines {
        let keys: Vec<&String> = l.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 4);
    }
}

#[test]
fn classify_keeps_one_line_per_message() {
    let f = fixture();
    let text = std::fs::read_to_string(&f.config.labeled_path).unwrap();
    let head: String = text.lines().take(300).map(|l| format!("{l}\n")).collect();
    let (lines, _) = classify(&head);
    assert_eq!(lines.len(), 300);
    let correct = lines
        .iter()
        .zip(head.lines())
        .filter(|(out, inp)| {
            let v: serde_json::Value = serde_json::from_str(inp).unwrap();
            let want = Label::from_index(v["label"].as_u64().unwrap() as usize).unwrap();
            out["id"] == v["id"] && out["label"] == want.as_str()
        })
        .count();
    assert!(correct >= 270, "{correct}/300");
}

#[test]
fn config_file_round_trip() {
    let f = fixture();
    let path = f.config.labeled_path.parent().unwrap().join("config.json");
    assert_eq!(PipelineConfig::load(&path).unwrap(), f.config);
}
