#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(messages) = aggrodetect::corpus::parse_chan_thread(data) {
        for m in messages {
            assert!(!m.id.is_empty());
        }
    }
});
