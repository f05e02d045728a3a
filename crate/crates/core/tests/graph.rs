use std::collections::BTreeSet;

use dyncolor::graph::{DynamicGraph, GraphError, UpdateOp, VertexId};
use dyncolor::ledger::{check_proper, Color, ColoredGraph, UncoloredVertex};
use proptest::prelude::*;

fn v(x: u64) -> VertexId {
    VertexId(x)
}

#[test]
fn insert_into_empty_graph() {
    let mut g = DynamicGraph::new();
    g.apply(&UpdateOp::insert_vertex(1, &[])).unwrap();
    assert_eq!(g.sorted_vertices(), vec![v(1)]);
    assert_eq!(g.edge_count(), 0);
}

#[test]
fn delete_vertex_drops_incident_edges() {
    let mut g = DynamicGraph::from_edges([1, 2], &[]);
    g.apply(&UpdateOp::insert_edge(1, 2)).unwrap();
    g.apply(&UpdateOp::delete_vertex(1)).unwrap();
    assert_eq!(g.sorted_vertices(), vec![v(2)]);
    assert_eq!(g.edge_count(), 0);
    assert!(g.neighbors(v(2)).is_empty());
    g.check_structure().unwrap();
}

#[test]
fn self_loop_rejected() {
    let mut g = DynamicGraph::from_edges([1], &[]);
    assert_eq!(g.apply(&UpdateOp::insert_edge(1, 1)), Err(GraphError::SelfLoop(v(1))));
}

#[test]
fn errors_leave_graph_untouched() {
    let mut g = DynamicGraph::from_edges([1, 2, 3], &[(1, 2)]);
    let cases = [
        (UpdateOp::insert_vertex(1, &[]), GraphError::DuplicateVertex(v(1))),
        (UpdateOp::insert_vertex(4, &[1, 9]), GraphError::UnknownVertex(v(9))),
        (UpdateOp::insert_edge(2, 1), GraphError::DuplicateEdge(v(2), v(1))),
        (UpdateOp::delete_edge(1, 3), GraphError::MissingEdge(v(1), v(3))),
        (UpdateOp::delete_vertex(7), GraphError::UnknownVertex(v(7))),
    ];
    for (op, want) in cases {
        assert_eq!(g.apply(&op), Err(want));
        assert_eq!(g.sorted_vertices(), vec![v(1), v(2), v(3)]);
        assert_eq!(g.sorted_edges(), vec![(v(1), v(2))]);
    }
}

#[test]
fn proper_examples() {
    let path = DynamicGraph::from_edges([1, 2, 3], &[(1, 2), (2, 3)]);
    let mut cg = ColoredGraph::new(path);
    cg.assign(v(1), Color(0));
    cg.assign(v(2), Color(1));
    cg.assign(v(3), Color(0));
    assert_eq!(cg.is_proper(), Ok(true));

    let mut edge = ColoredGraph::new(DynamicGraph::from_edges([1, 2], &[(1, 2)]));
    edge.assign(v(1), Color(5));
    edge.assign(v(2), Color(5));
    assert_eq!(edge.is_proper(), Ok(false));

    let empty = ColoredGraph::new(DynamicGraph::new());
    assert_eq!(check_proper(&empty.graph, &empty.ledger), Ok(true));
}

#[test]
fn uncolored_vertex_is_an_error() {
    let mut cg = ColoredGraph::new(DynamicGraph::from_edges([1, 2], &[]));
    cg.assign(v(1), Color(0));
    assert_eq!(cg.is_proper(), Err(UncoloredVertex(v(2))));
}

#[test]
fn record_counts_only_real_changes() {
    let mut cg = ColoredGraph::new(DynamicGraph::from_edges([3, 9], &[]));
    cg.assign(v(3), Color(1));
    assert_eq!(cg.metrics.recolorings_total, 0, "initial coloring is free");

    cg.begin_update();
    assert!(cg.assign(v(3), Color(2)));
    assert_eq!(cg.finish_update(false), 1);

    cg.begin_update();
    assert!(!cg.assign(v(3), Color(2)));
    assert_eq!(cg.finish_update(false), 0);
    assert_eq!(cg.ledger.changes().len(), 3, "no-op assignment is still recorded");

    cg.begin_update();
    assert!(cg.assign(v(9), Color(7)));
    assert_eq!(cg.finish_update(true), 1, "fresh vertex costs one");

    let m = &cg.metrics;
    assert_eq!(m.recolorings_per_update, vec![1, 0, 1]);
    assert_eq!(m.recolorings_total, 2);
    assert_eq!(m.insertion_updates, 1);
}

fn arb_ops() -> impl Strategy<Value = Vec<(u8, u64, u64, Vec<u64>)>> {
    prop::collection::vec((0u8..4, 0u64..12, 0u64..12, prop::collection::vec(0u64..12, 0..4)), 1..120)
}

fn to_op(kind: u8, a: u64, b: u64, nbrs: &[u64]) -> UpdateOp {
    match kind {
        0 => {
            let uniq: BTreeSet<u64> = nbrs.iter().copied().filter(|&x| x != a).collect();
            UpdateOp::InsertVertex(v(a), uniq.into_iter().map(v).collect())
        }
        1 => UpdateOp::delete_vertex(a),
        2 => UpdateOp::insert_edge(a, b),
        _ => UpdateOp::delete_edge(a, b),
    }
}

fn snapshot(g: &DynamicGraph) -> (Vec<VertexId>, Vec<(VertexId, VertexId)>) {
    (g.sorted_vertices(), g.sorted_edges())
}

proptest! {
    #[test]
    fn symmetric_and_simple_after_any_sequence(raw in arb_ops()) {
        let mut g = DynamicGraph::new();
        for (k, a, b, n) in raw {
            let op = to_op(k, a, b, &n);
            let before = snapshot(&g);
            let ok = g.validate(&op).is_ok();
            let res = g.apply(&op);
            prop_assert_eq!(ok, res.is_ok());
            if res.is_err() {
                prop_assert_eq!(snapshot(&g), before);
            }
            prop_assert!(g.check_structure().is_ok());
            for (x, y) in g.edges() {
                prop_assert!(x != y);
                prop_assert!(g.neighbors(y).contains(&x));
            }
        }
    }

    #[test]
    fn ledger_replay_matches_colors(assigns in prop::collection::vec((0u64..8, prop::option::of(0u64..5)), 0..200)) {
        let mut cg = ColoredGraph::new(DynamicGraph::new());
        let mut counted = 0u64;
        for (i, (x, c)) in assigns.iter().enumerate() {
            cg.begin_update();
            match c {
                Some(c) => {
                    let before = cg.color(v(*x));
                    let did = cg.assign(v(*x), Color(*c));
                    prop_assert_eq!(did, before != Some(Color(*c)));
                }
                None => cg.unassign(v(*x)),
            }
            counted += cg.finish_update(i % 2 == 0);
        }
        let replayed = cg.ledger.replay();
        prop_assert_eq!(&replayed, cg.ledger.colors());
        prop_assert_eq!(cg.metrics.recolorings_total, counted);
        prop_assert_eq!(cg.metrics.recolorings_per_update.iter().sum::<u64>(), counted);
        let distinct: BTreeSet<_> = replayed.values().collect();
        prop_assert_eq!(cg.ledger.distinct_colors(), distinct.len());
    }
}
