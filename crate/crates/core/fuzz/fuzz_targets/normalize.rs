#![no_main]

use aggrodetect::textnorm::{stem, tokenize};
use aggrodetect::Language;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    for lang in [Language::En, Language::Ru] {
        for t in tokenize(text, lang) {
            assert!(!t.is_empty() && !t.contains(char::is_whitespace));
            let _ = stem(&t, lang);
        }
    }
});
