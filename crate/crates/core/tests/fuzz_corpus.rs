//! Replays the checked-in fuzz seeds through the same checks the fuzz
//! targets make, so regressions show up under plain `cargo test`.

use std::path::{Path, PathBuf};

use aggrodetect::corpus::{clean_markup, parse_chan_thread, parse_jsonl, parse_message_line, to_jsonl_line};
use aggrodetect::embedding::{read_text, write_text};
use aggrodetect::features::SeedSet;
use aggrodetect::forest::RandomForest;
use aggrodetect::pipeline::PipelineConfig;
use aggrodetect::textnorm::{parse_word_list, stem, tokenize, PhraseModel, StopwordList};
use aggrodetect::Language;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text_seeds(target: &str) -> Vec<(PathBuf, String)> {
    seeds(target)
        .into_iter()
        .map(|(p, b)| (p, String::from_utf8(b).unwrap()))
        .collect()
}

#[test]
fn clean_markup_seeds() {
    for (p, text) in text_seeds("clean_markup") {
        let once = clean_markup(&text);
        assert_eq!(clean_markup(&once), once, "{}", p.display());
    }
}

#[test]
fn parse_jsonl_seeds() {
    let mut parsed_any = false;
    for (_, data) in seeds("parse_jsonl") {
        if let Ok(parsed) = parse_jsonl(data.as_slice()) {
            parsed_any = true;
            for m in &parsed.messages {
                assert_eq!(parse_message_line(&to_jsonl_line(m)).as_ref(), Ok(m));
            }
        }
    }
    assert!(parsed_any);
}

#[test]
fn chan_thread_seeds() {
    for (_, data) in seeds("parse_chan_thread") {
        if let Ok(messages) = parse_chan_thread(&data) {
            assert!(messages.iter().all(|m| !m.id.is_empty()));
        }
    }
}

#[test]
fn normalize_seeds() {
    for (_, text) in text_seeds("normalize") {
        for lang in [Language::En, Language::Ru] {
            for t in tokenize(&text, lang) {
                assert!(!t.is_empty() && !t.contains(char::is_whitespace));
                let _ = stem(&t, lang);
            }
        }
    }
}

#[test]
fn embedding_text_seeds() {
    for (_, data) in seeds("embedding_text") {
        if let Ok(model) = read_text(data.as_slice()) {
            let mut first = Vec::new();
            write_text(&model, &mut first).unwrap();
            let mut second = Vec::new();
            write_text(&read_text(first.as_slice()).unwrap(), &mut second).unwrap();
            assert_eq!(first, second);
        }
    }
}

#[test]
fn forest_json_seeds() {
    for (p, text) in text_seeds("forest_json") {
        let forest = RandomForest::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let json = forest.to_json();
        assert_eq!(RandomForest::from_json(&json).unwrap().to_json(), json);
    }
}

#[test]
fn phrase_json_seeds() {
    for (_, text) in text_seeds("phrase_json") {
        let model = PhraseModel::from_json(&text).unwrap();
        assert_eq!(PhraseModel::from_json(&model.to_json()).unwrap(), model);
    }
}

#[test]
fn config_seeds() {
    for (p, text) in text_seeds("pipeline_config") {
        let cfg = PipelineConfig::from_json(&text, Path::new("/base")).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(PipelineConfig::from_json(&cfg.to_json(), Path::new("/other")).unwrap(), cfg);
    }
}

#[test]
fn word_list_seeds() {
    for (_, text) in text_seeds("word_list") {
        assert!(parse_word_list(&text).iter().all(|w| !w.is_empty() && !w.contains('#')));
        if let Ok(s) = SeedSet::parse(Language::En, &text) {
            assert_eq!(SeedSet::parse(Language::En, &s.to_text()).unwrap(), s);
        }
        let stop = StopwordList::parse(Language::Ru, &text).unwrap();
        assert_eq!(StopwordList::parse(Language::Ru, &stop.to_text()).unwrap(), stop);
    }
}
