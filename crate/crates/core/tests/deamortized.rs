use dyncolor::big::BigBuckets;
use dyncolor::deamortized::audit::lemma;
use dyncolor::deamortized::{AuditReport, DeamBig, DeamSmall};
use dyncolor::engine::{Layout, Recolorer, SizePolicy};
use dyncolor::graph::{DynamicGraph, UpdateOp};
use dyncolor::harness::gen::{conflict_forest, growing_forest, vertex_fill};
use dyncolor::harness::{generate, StreamSpec};
use dyncolor::small::SmallBuckets;
use dyncolor::StaticColorer;
use proptest::prelude::*;

trait Deam: Recolorer {
    fn audit(&self) -> AuditReport;
    fn sim(&self) -> Layout;
    fn real(&self) -> Layout;
    fn shadows(&self) -> usize;
}

impl Deam for DeamSmall {
    fn audit(&self) -> AuditReport {
        self.audit_lemmas().unwrap_or_else(|v| panic!("{v}"))
    }
    fn sim(&self) -> Layout {
        self.sim_layout()
    }
    fn real(&self) -> Layout {
        self.real_layout()
    }
    fn shadows(&self) -> usize {
        self.overlay().shadow_count()
    }
}

impl Deam for DeamBig {
    fn audit(&self) -> AuditReport {
        self.audit_lemmas().unwrap_or_else(|v| panic!("{v}"))
    }
    fn sim(&self) -> Layout {
        self.sim_layout()
    }
    fn real(&self) -> Layout {
        self.real_layout()
    }
    fn shadows(&self) -> usize {
        self.overlay().shadow_count()
    }
}

/// Runs `ops`, auditing after each update, and returns the last audit.
fn drive(e: &mut dyn Deam, ops: &[UpdateOp]) -> AuditReport {
    let mut last = AuditReport::default();
    for (i, op) in ops.iter().enumerate() {
        let k = e.apply(op).unwrap();
        let cap = e.per_update_cap().unwrap();
        assert!(k <= cap, "update {} cost {k} > cap {cap}", i + 1);
        assert_eq!(e.state().is_proper(), Ok(true), "update {}", i + 1);
        assert!(e.state().metrics.distinct_colors_now <= e.color_budget().unwrap(), "update {}", i + 1);
        e.check_invariants().unwrap();
        last = e.audit();
        if e.shadows() == 0 {
            assert_eq!(e.real(), e.sim(), "update {}", i + 1);
        }
    }
    last
}

fn small(d: u32) -> DeamSmall {
    DeamSmall::new(d, DynamicGraph::new(), StaticColorer::Greedy).unwrap()
}

fn big(d: u32) -> DeamBig {
    DeamBig::new(d, DynamicGraph::new(), StaticColorer::Greedy).unwrap()
}

#[test]
fn first_insert_costs_one() {
    let op = UpdateOp::insert_vertex(0, &[]);
    let mut s = small(2);
    assert_eq!(s.apply(&op).unwrap(), 1);
    assert_eq!(s.overlay().shadow_count(), 0);
    s.audit_lemmas().unwrap();
    let mut b = big(2);
    assert_eq!(b.apply(&op).unwrap(), 1);
    assert_eq!(b.overlay().shadow_count(), 0);
    b.audit_lemmas().unwrap();
}

#[test]
fn caps_follow_parameters() {
    for d in [1, 2, 3, 5] {
        let mut s = small(d);
        let mut b = big(d);
        drive(&mut s, &vertex_fill(50));
        drive(&mut b, &vertex_fill(50));
        assert_eq!(s.per_update_cap(), Some(d as u64 + 2));
        assert_eq!(b.per_update_cap(), Some((d as u64 + 1) * b.s().unwrap()));
    }
}

#[test]
fn fill_exercises_every_lemma_small() {
    for d in [1, 2, 3, 5] {
        let mut e = small(d);
        let rep = drive(&mut e, &vertex_fill(3000));
        assert!(e.state().metrics.resets >= 3, "d={d} resets {}", e.state().metrics.resets);
        for l in [lemma::EMPTY_LEVEL0, lemma::SECONDARY_RESET_EMPTY] {
            assert!(rep.count(l) > 0, "d={d} {l} never exercised");
        }
        // these need a level above 0
        if d > 1 {
            assert!(rep.count(lemma::EMPTY_DESTINATION) > 0, "d={d}");
            assert!(rep.count(lemma::DRAIN_BOUND) > 0, "d={d}");
            assert!(rep.count(lemma::REFILL_INTERVAL) > 0, "d={d}");
        }
        let hist = &e.state().metrics.s_history;
        assert!(hist.windows(2).all(|w| w[0] <= w[1]), "{hist:?}");
    }
}

#[test]
fn fill_exercises_every_lemma_big() {
    for d in [1, 2, 3, 5] {
        let mut e = big(d);
        let rep = drive(&mut e, &vertex_fill(3000));
        assert!(e.state().metrics.resets >= 3, "d={d}");
        for l in [lemma::SECONDARY_EMPTY_ON_PLACE, lemma::SECONDARY_RESET_EMPTY, lemma::HIGH_POINT] {
            assert!(rep.count(l) > 0, "d={d} {l} never exercised");
        }
    }
}

#[test]
fn level0_fill_checks_destination() {
    let mut e = DeamSmall::new(2, DynamicGraph::from_edges(0..16, &[]), StaticColorer::Greedy).unwrap();
    assert_eq!(e.s(), Some(4));
    let fill: Vec<UpdateOp> = (16..20).map(|v| UpdateOp::insert_vertex(v, &[])).collect();
    let rep = drive(&mut e, &fill[..3]);
    assert_eq!(rep.count(lemma::EMPTY_DESTINATION), 0);
    let rep = drive(&mut e, &fill[3..]);
    assert_eq!(rep.count(lemma::EMPTY_DESTINATION), 1);
}

fn assert_mirrors_small(d: u32, ops: &[UpdateOp]) {
    let mut deam = small(d);
    let mut amort =
        SmallBuckets::with_policy(d, DynamicGraph::new(), StaticColorer::Greedy, SizePolicy::NonDecreasing).unwrap();
    for (i, op) in ops.iter().enumerate() {
        deam.apply(op).unwrap();
        amort.apply(op).unwrap();
        assert_eq!(deam.sim_layout(), amort.layout(), "d={d} update {}", i + 1);
        assert_eq!(deam.s(), amort.s());
    }
}

fn assert_mirrors_big(d: u32, ops: &[UpdateOp]) {
    let mut deam = big(d);
    let mut amort =
        BigBuckets::with_policy(d, DynamicGraph::new(), StaticColorer::Greedy, SizePolicy::NonDecreasing).unwrap();
    for (i, op) in ops.iter().enumerate() {
        deam.apply(op).unwrap();
        amort.apply(op).unwrap();
        assert_eq!(deam.sim_layout(), amort.layout(), "d={d} update {}", i + 1);
        assert_eq!(deam.s(), amort.s());
    }
}

#[test]
fn simulation_mirrors_amortized_engines() {
    for d in [1, 2, 3] {
        assert_mirrors_small(d, &vertex_fill(500));
        assert_mirrors_big(d, &vertex_fill(500));
        assert_mirrors_small(d, &conflict_forest(150, d as u64));
        assert_mirrors_big(d, &conflict_forest(150, d as u64));
    }
    let ops = generate(&StreamSpec::new(99, 10_000, 1000, false));
    assert_mirrors_small(3, &ops);
    assert_mirrors_big(3, &ops);
}

#[test]
fn forest_color_budgets() {
    for d in [1, 2, 3] {
        let mut s = DeamSmall::new(d, DynamicGraph::new(), StaticColorer::BipartiteBfs).unwrap();
        drive(&mut s, &growing_forest(400, 5));
        let mut b = DeamBig::new(d, DynamicGraph::new(), StaticColorer::BipartiteBfs).unwrap();
        drive(&mut b, &conflict_forest(200, 5));
        assert!(b.state().metrics.distinct_colors_max <= 4 * (d as u64 + 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_streams_hold_caps_and_lemmas(seed in any::<u64>(), d in 1u32..5, forest in any::<bool>()) {
        let ops = generate(&StreamSpec::new(seed, 500, 60, forest));
        drive(&mut small(d), &ops);
        drive(&mut big(d), &ops);
    }
}
