#![no_main]
use dyncolor::harness::{parse_stream, run_ops};
use dyncolor::{DynamicGraph, EngineKind, StaticColorer};
use libfuzzer_sys::fuzz_target;

// First byte picks d, the rest is a stream. Every engine must stay proper on any valid stream.
fuzz_target!(|data: &[u8]| {
    let Some((&d, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let Ok(ops) = parse_stream(text) else {
        return;
    };
    if ops.len() > 400 {
        return;
    }
    let d = u32::from(d % 6) + 1;
    for engine in EngineKind::ALL {
        let r = run_ops(engine, d, StaticColorer::Greedy, DynamicGraph::new(), &ops, true, String::new())
            .unwrap_or_else(|e| panic!("{engine} d={d}: {e}"));
        assert_eq!(r.per_update_cap_violations, 0, "{engine} d={d}");
        assert_eq!(r.color_budget_violations, 0, "{engine} d={d}");
    }
});
