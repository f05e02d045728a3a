#![no_main]
use dyncolor::harness::AdversarySpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = s.parse::<AdversarySpec>() {
            let _ = spec.resolved_kind();
        }
    }
});
