#![no_main]

use std::path::Path;

use aggrodetect::pipeline::PipelineConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = PipelineConfig::from_json(text, Path::new("/base")) {
        assert!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0);
        assert_eq!(PipelineConfig::from_json(&cfg.to_json(), Path::new("/other")).unwrap(), cfg);
    }
});
