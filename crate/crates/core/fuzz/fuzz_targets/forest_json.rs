#![no_main]

use aggrodetect::forest::RandomForest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(forest) = RandomForest::from_json(text) {
        let json = forest.to_json();
        assert_eq!(RandomForest::from_json(&json).unwrap().to_json(), json);
        let _ = forest.predict(&vec![0.5; forest.n_features()]);
    }
});
