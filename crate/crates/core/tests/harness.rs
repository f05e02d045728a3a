use dyncolor::adversary::BaselineKind;
use dyncolor::graph::{DynamicGraph, GraphError, UpdateOp, VertexId};
use dyncolor::harness::gen::{growing_forest, vertex_fill};
use dyncolor::harness::stream::{format_graph, parse_stream_from};
use dyncolor::harness::{
    arena, format_stream, generate, parse_stream, read_stream, run, run_ops, sweep, AdversarySpec, ArenaAlgorithm,
    ArenaConfig, ArenaKind, HarnessError, InputSource, RunConfig, StreamError, StreamSpec,
};
use dyncolor::{EngineKind, StaticColorer};
use proptest::prelude::*;

#[test]
fn parse_basic() {
    let ops = parse_stream("av 1\nav 2\nae 1 2").unwrap();
    assert_eq!(
        ops,
        vec![UpdateOp::insert_vertex(1, &[]), UpdateOp::insert_vertex(2, &[]), UpdateOp::insert_edge(1, 2)]
    );
    assert_eq!(parse_stream("").unwrap(), vec![]);
    let ops = parse_stream("# header\n\nav 3   # trailing\nav 4 3\nre 4 3\nrv 3\n").unwrap();
    assert_eq!(ops.len(), 4);
    assert_eq!(ops[1], UpdateOp::insert_vertex(4, &[3]));
}

#[test]
fn parse_errors_carry_lines() {
    let e = parse_stream("ae 1 1").unwrap_err();
    assert!(matches!(e, StreamError::Parse { line: 1, .. }), "{e}");
    assert!(e.to_string().contains("self-loop"));
    let e = parse_stream("av 1\nav 2 2").unwrap_err();
    assert_eq!(e.line(), Some(2));
    assert!(matches!(parse_stream("av 1\nav 2 1 1"), Err(StreamError::Parse { line: 2, .. })));
    assert!(matches!(parse_stream("zz 1"), Err(StreamError::Parse { line: 1, .. })));
    assert!(matches!(parse_stream("rv"), Err(StreamError::Parse { line: 1, .. })));
    assert!(matches!(parse_stream("ae 1 x"), Err(StreamError::Parse { line: 1, .. })));
    assert!(matches!(parse_stream("av"), Err(StreamError::Parse { line: 1, .. })));
    assert_eq!(
        parse_stream("av 1\n# gap\nae 1 2\n"),
        Err(StreamError::Validation { line: 3, source: GraphError::UnknownVertex(VertexId(2)) })
    );
    assert_eq!(
        parse_stream("av 1\nav 1"),
        Err(StreamError::Validation { line: 2, source: GraphError::DuplicateVertex(VertexId(1)) })
    );
}

#[test]
fn read_stream_reports_io_errors() {
    let e = read_stream(std::path::Path::new("/nonexistent/stream.txt")).unwrap_err();
    assert!(matches!(e, StreamError::Io { .. }));
    assert_eq!(e.line(), None);
}

#[test]
fn graph_dump_reparses() {
    let g = DynamicGraph::from_edges([5, 1, 9], &[(9, 1), (5, 9)]);
    let text = format_graph(&g);
    assert_eq!(text, "av 1\nav 5\nav 9\nae 1 9\nae 5 9\n");
    let ops = parse_stream(&text).unwrap();
    let mut h = DynamicGraph::new();
    for op in &ops {
        h.apply(op).unwrap();
    }
    assert_eq!(h.sorted_edges(), g.sorted_edges());
    assert!(parse_stream_from("ae 1 5", &g).is_ok());
    assert!(parse_stream_from("ae 1 9", &g).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn streams_round_trip(seed in any::<u64>(), forest in any::<bool>()) {
        let ops = generate(&StreamSpec::new(seed, 300, 40, forest));
        prop_assert_eq!(parse_stream(&format_stream(&ops)).unwrap(), ops);
    }

    #[test]
    fn forest_streams_stay_acyclic(seed in any::<u64>()) {
        let mut g = DynamicGraph::new();
        for op in generate(&StreamSpec::new(seed, 400, 50, true)) {
            if let UpdateOp::InsertEdge(u, v) = &op {
                prop_assert!(!g.connected(*u, *v));
            }
            g.apply(&op).unwrap();
        }
    }
}

#[test]
fn generator_is_seeded() {
    let a = generate(&StreamSpec::new(5, 1000, 100, false));
    assert_eq!(a, generate(&StreamSpec::new(5, 1000, 100, false)));
    assert_ne!(a, generate(&StreamSpec::new(6, 1000, 100, false)));
    assert_eq!(a.len(), 1000);
    assert!(generate(&StreamSpec::new(5, 1000, 100, false)).len() == 1000);
}

fn gen_input(seed: u64, forest: bool) -> InputSource {
    InputSource::Generated(StreamSpec::new(seed, 3000, 300, forest))
}

#[test]
fn reports_are_deterministic_and_check_independent() {
    for engine in EngineKind::ALL {
        let cfg = RunConfig::new(engine, 3, StaticColorer::Greedy, gen_input(1, false));
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        let c = run(&cfg.clone().checked()).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_json(), c.to_json());
        assert!(!a.to_json().contains("wall_time"));
        assert_eq!(a.recolorings_per_update.len() as u64, a.updates);
    }
}

#[test]
fn small_deam_d3_per_update_at_most_five() {
    for seed in 0..4 {
        let r = run(&RunConfig::new(EngineKind::SmallDeam, 3, StaticColorer::Greedy, gen_input(seed, seed % 2 == 0)))
            .unwrap();
        assert!(r.max_per_update <= 5);
        assert_eq!(r.per_update_cap_max, Some(5));
        assert_eq!(r.per_update_cap_violations, 0);
    }
}

#[test]
fn big_d1_uses_at_most_two_bucket_palettes() {
    let r = run(&RunConfig::new(
        EngineKind::Big,
        1,
        StaticColorer::BipartiteBfs,
        InputSource::Ops { label: "forest".into(), ops: growing_forest(300, 4) },
    ))
    .unwrap();
    assert!(r.distinct_colors_max <= 2 * r.bucket_colors_max);
    assert_eq!(r.bucket_colors_max, 2);
}

#[test]
fn run_rejects_bad_config() {
    let cfg = RunConfig::new(EngineKind::Small, 0, StaticColorer::Greedy, gen_input(1, true));
    assert!(matches!(run(&cfg), Err(HarnessError::Config(_))));
    let bad = InputSource::Path("/nonexistent".into());
    assert!(matches!(
        run(&RunConfig::new(EngineKind::Small, 2, StaticColorer::Greedy, bad)),
        Err(HarnessError::Stream(_))
    ));
}

#[test]
fn engine_errors_name_the_update() {
    let ops = vec![UpdateOp::insert_vertex(0, &[]), UpdateOp::insert_vertex(1, &[]), UpdateOp::insert_edge(0, 1)];
    let tri = vec![
        UpdateOp::insert_vertex(0, &[]),
        UpdateOp::insert_vertex(1, &[0]),
        UpdateOp::insert_vertex(2, &[0, 1]),
        UpdateOp::insert_vertex(3, &[]),
    ];
    run_ops(EngineKind::Small, 1, StaticColorer::BipartiteBfs, DynamicGraph::new(), &ops, true, "ok".into()).unwrap();
    // update 4 fills level 0 and the reset must 2-color the triangle
    let e = run_ops(EngineKind::Small, 1, StaticColorer::BipartiteBfs, DynamicGraph::new(), &tri, true, "t".into())
        .unwrap_err();
    assert_eq!(e.update(), Some(4), "{e}");
}

#[test]
fn sweep_rows_sorted_and_budgets_monotone() {
    let input = InputSource::Ops { label: "forest".into(), ops: growing_forest(2000, 9) };
    let rep = sweep(EngineKind::Small, StaticColorer::Greedy, &input, &[4, 1, 2, 2]).unwrap();
    let ds: Vec<u32> = rep.rows.iter().map(|r| r.d).collect();
    assert_eq!(ds, vec![1, 2, 4]);
    let budgets: Vec<u64> = rep.rows.iter().map(|r| r.amortized_budget.unwrap()).collect();
    assert!(budgets.windows(2).all(|w| w[0] <= w[1]), "{budgets:?}");
    for r in &rep.rows {
        assert!(r.recolorings_total <= r.amortized_budget.unwrap());
        assert!(r.colors_max <= r.color_budget_max.unwrap());
    }
    let s: Vec<u64> = rep.rows.iter().map(|r| r.s_max).collect();
    assert!(s.windows(2).all(|w| w[0] >= w[1]), "{s:?}");
    let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
    assert_eq!(json["schema"], "dyncolor.sweep.v1");
    let row = json["rows"][0].as_object().unwrap();
    for k in ["d", "s_final", "s_max", "colors_max", "recolorings_total", "max_per_update"] {
        assert!(row.contains_key(k), "{k}");
    }
    assert!(sweep(EngineKind::Small, StaticColorer::Greedy, &input, &[0]).is_err());
}

#[test]
fn log_d_gives_s_two() {
    let n = 1000u64;
    let d = 64 - (n - 1).leading_zeros();
    assert_eq!(d, 10);
    for engine in EngineKind::ALL {
        let input = InputSource::Ops { label: "fill".into(), ops: vertex_fill(n) };
        let r = run(&RunConfig::new(engine, d, StaticColorer::Greedy, input)).unwrap();
        assert!(r.s_max <= 2, "{engine}: {}", r.s_max);
    }
}

#[test]
fn report_schema_fields() {
    let r = run(&RunConfig::new(EngineKind::Big, 2, StaticColorer::Greedy, gen_input(2, false))).unwrap();
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["schema"], "dyncolor.run.v1");
    for k in [
        "engine",
        "d",
        "colorer",
        "input",
        "updates",
        "insertion_updates",
        "s_history",
        "s_final",
        "s_max",
        "resets",
        "recolorings_total",
        "recolorings_per_update",
        "max_per_update",
        "distinct_colors_now",
        "distinct_colors_max",
        "bucket_colors_max",
        "color_budget_max",
        "color_budget_violations",
        "per_update_cap_max",
        "per_update_cap_violations",
        "amortized_budget",
    ] {
        assert!(json.get(k).is_some(), "missing {k}");
    }
    assert_eq!(json["engine"], "big");
    assert!(r.summary().contains("engine big d=2"));
}

#[test]
fn adversary_spec_parsing() {
    let s: AdversarySpec = "c=2,n=9,m=100".parse().unwrap();
    assert_eq!((s.c, s.n, s.m), (2, 9, 100));
    assert_eq!(s.resolved_kind(), ArenaKind::Stars);
    let s: AdversarySpec = "c=3, n=19683, m=54, cycles=1".parse().unwrap();
    assert_eq!(s.resolved_kind(), ArenaKind::C3);
    assert_eq!(s.cycles, Some(1));
    let s: AdversarySpec = "c=3,n=8,m=10,resets=2,alpha=2000".parse().unwrap();
    assert_eq!(s.resolved_kind(), ArenaKind::General);
    assert_eq!((s.alpha, s.resets), (Some(2000), Some(2)));
    let s: AdversarySpec = format!("c=3,n={},m=1", u64::MAX).parse().unwrap();
    assert_eq!(s.resolved_kind(), ArenaKind::General);
    let s: AdversarySpec = "c=3,n=19683,m=1,kind=general".parse().unwrap();
    assert_eq!(s.resolved_kind(), ArenaKind::General);
    for bad in ["", "c=2,n=9", "c=2,n=9,m=x", "c=2,n=9,m=1,q=3", "c=2;n=9;m=1", "c=2,n=9,m=1,kind=foo"] {
        assert!(bad.parse::<AdversarySpec>().is_err(), "{bad}");
    }
}

fn arena_cfg(spec: &str, alg: ArenaAlgorithm) -> ArenaConfig {
    ArenaConfig { spec: spec.parse().unwrap(), algorithm: alg, checked: false }
}

#[test]
fn stars_arena_forces_150() {
    let res = arena(&arena_cfg("c=2,n=9,m=100", ArenaAlgorithm::Baseline(BaselineKind::MinimalRepair))).unwrap();
    let r = &res.report;
    assert!(r.forced_total >= 150);
    assert_eq!(r.floors.len(), 1);
    assert_eq!(r.floors[0].required, 150);
    assert!(r.floors_met());
    assert_eq!(r.updates, 100);
    let text = res.replay_text();
    let ops = parse_stream(&text).unwrap();
    assert_eq!(ops.len() as u64, r.vertices + res.initial.edge_count() as u64 + r.updates);
}

#[test]
fn c3_arena_cycle_floor() {
    let res =
        arena(&arena_cfg("c=3,n=19683,m=54,cycles=1", ArenaAlgorithm::Baseline(BaselineKind::MinimalRepair))).unwrap();
    assert!(res.report.floors_met(), "{}", res.report.summary());
    assert_eq!(res.report.ledger.cycles.len(), 1);
    assert!(res.report.updates <= 27);
    parse_stream(&res.replay_text()).unwrap();
}

#[test]
fn general_arena_report() {
    let res =
        arena(&arena_cfg("c=3,n=8,m=100000,resets=3", ArenaAlgorithm::Baseline(BaselineKind::GreedyRepair))).unwrap();
    let r = &res.report;
    assert!(r.floors_met());
    assert!(r.ledger.resets.len() >= 3);
    assert_eq!(r.vertices, 9216);
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["schema"], "dyncolor.arena.v1");
    assert!(json["ledger"]["resets"].as_array().unwrap().len() >= 3);
    let again =
        arena(&arena_cfg("c=3,n=8,m=100000,resets=3", ArenaAlgorithm::Baseline(BaselineKind::GreedyRepair))).unwrap();
    assert_eq!(r.to_json(), again.report.to_json());
}

#[test]
fn engines_in_the_arena_exceed_c() {
    let alg = ArenaAlgorithm::Engine { kind: EngineKind::Small, d: 2, colorer: StaticColorer::Greedy };
    assert!(arena(&arena_cfg("c=2,n=9,m=100", alg)).is_err());
}

#[test]
fn arena_config_errors() {
    let alg = ArenaAlgorithm::Baseline(BaselineKind::MinimalRepair);
    assert!(arena(&arena_cfg("c=3,n=9,m=10,kind=stars", alg.clone())).is_err());
    assert!(arena(&arena_cfg("c=2,n=10,m=10,kind=stars", alg.clone())).is_err());
    assert!(arena(&arena_cfg("c=2,n=9,m=10,kind=c3", alg)).is_err());
}
