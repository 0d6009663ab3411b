#![no_main]

use aggrodetect::features::SeedSet;
use aggrodetect::textnorm::{parse_word_list, StopwordList};
use aggrodetect::Language;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    for w in parse_word_list(text) {
        assert!(!w.is_empty() && !w.contains('#'));
    }
    if let Ok(seeds) = SeedSet::parse(Language::En, text) {
        assert_eq!(SeedSet::parse(Language::En, &seeds.to_text()).unwrap(), seeds);
    }
    if let Ok(stop) = StopwordList::parse(Language::Ru, text) {
        assert_eq!(StopwordList::parse(Language::Ru, &stop.to_text()).unwrap(), stop);
    }
});
