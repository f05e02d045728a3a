#![no_main]
use dyncolor::harness::parse_stream;
use dyncolor::harness::stream::{format_stream, parse_ops};
use libfuzzer_sys::fuzz_target;

// A stream that parses must print back to text that parses to the same ops.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ops) = parse_ops(text) {
        let ops: Vec<_> = ops.into_iter().map(|(_, op)| op).collect();
        let again = parse_ops(&format_stream(&ops)).expect("formatted stream parses");
        assert_eq!(again.into_iter().map(|(_, op)| op).collect::<Vec<_>>(), ops);
    }
    if let Ok(ops) = parse_stream(text) {
        assert_eq!(parse_stream(&format_stream(&ops)).expect("valid stream re-validates"), ops);
    }
});
