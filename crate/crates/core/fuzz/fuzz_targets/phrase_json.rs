#![no_main]

use aggrodetect::textnorm::PhraseModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(model) = PhraseModel::from_json(text) {
        assert_eq!(PhraseModel::from_json(&model.to_json()).unwrap(), model);
    }
});
