#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = aggrodetect::corpus::parse_jsonl(data) {
        assert_eq!(parsed.messages.len(), parsed.lines.len());
        for m in &parsed.messages {
            let line = aggrodetect::corpus::to_jsonl_line(m);
            assert_eq!(aggrodetect::corpus::parse_message_line(&line).as_ref(), Ok(m));
        }
    }
});
