#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let once = aggrodetect::corpus::clean_markup(text);
    assert_eq!(aggrodetect::corpus::clean_markup(&once), once);
});
