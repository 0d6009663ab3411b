#![no_main]

use aggrodetect::embedding::{read_text, write_text};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(model) = read_text(data) {
        let mut first = Vec::new();
        write_text(&model, &mut first).unwrap();
        let again = read_text(first.as_slice()).unwrap();
        let mut second = Vec::new();
        write_text(&again, &mut second).unwrap();
        assert_eq!(first, second);
    }
});
