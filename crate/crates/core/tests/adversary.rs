use std::time::Instant;

use dyncolor::adversary::baselines::{bnb_min_repair, tree_min_repair};
use dyncolor::adversary::general::floor_pow_ratio;
use dyncolor::adversary::{
    arena_run, build_c3, build_general, build_stars_c2, Adversary, Baseline, BaselineKind, GeneralParams,
};
use dyncolor::engine::{EngineError, Recolorer};
use dyncolor::graph::{DynamicGraph, UpdateOp, VertexId};
use dyncolor::ledger::{Color, ColoredGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ALL_BASELINES: [BaselineKind; 3] =
    [BaselineKind::MinimalRepair, BaselineKind::BfsFlip, BaselineKind::GreedyRepair];

#[test]
fn stars_each_link_forces_a_star() {
    for n in [9, 12, 30] {
        for kind in ALL_BASELINES {
            let (g, mut adv) = build_stars_c2(n).unwrap();
            let mut alg = Baseline::new(kind, 2, g).unwrap();
            let out = arena_run(&mut adv, &mut alg, 100).unwrap();
            assert_eq!(out.ledger.links.len(), 50);
            for l in &out.ledger.links {
                assert!(l.forced >= n / 3, "{kind} n={n}: link at update {} forced {}", l.update, l.forced);
            }
            assert!(out.attributed.iter().sum::<u64>() >= 50 * n / 3);
        }
    }
}

#[test]
fn stars_minimal_repair_is_exact() {
    let (g, mut adv) = build_stars_c2(9).unwrap();
    let mut alg = Baseline::new(BaselineKind::MinimalRepair, 2, g).unwrap();
    let out = arena_run(&mut adv, &mut alg, 100).unwrap();
    // flipping the smaller star is optimal and costs exactly n/3
    assert!(out.ledger.links.iter().all(|l| l.forced == 3));
    assert_eq!(out.observed_recolorings, 150);
}

#[test]
fn stars_preconditions() {
    assert!(build_stars_c2(8).is_err());
    assert!(build_stars_c2(10).is_err());
}

/// Fewest changes to a proper coloring with colors `1..=c`, by trying all of them.
fn brute_min_changes(n: usize, edges: &[(usize, usize)], cur: &[Option<u64>], c: u64) -> Option<u64> {
    let mut best = None;
    let mut cols = vec![1u64; n];
    loop {
        if edges.iter().all(|&(a, b)| cols[a] != cols[b]) {
            let cost = (0..n).filter(|&i| cur[i] != Some(cols[i])).count() as u64;
            best = Some(best.map_or(cost, |b: u64| b.min(cost)));
        }
        let mut i = 0;
        while i < n {
            cols[i] += 1;
            if cols[i] <= c {
                break;
            }
            cols[i] = 1;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

fn changes(comp: &[VertexId], cur: &[Option<u64>], new: &[u64]) -> u64 {
    (0..comp.len()).filter(|&i| cur[i] != Some(new[i])).count() as u64
}

fn proper(g: &DynamicGraph, comp: &[VertexId], cols: &[u64]) -> bool {
    let at = |v: VertexId| cols[comp.iter().position(|&x| x == v).unwrap()];
    g.edges().all(|(a, b)| at(a) != at(b))
}

fn arb_tree() -> impl Strategy<Value = (usize, Vec<usize>, Vec<u64>, u64)> {
    (2usize..=9, 2u64..=3).prop_flat_map(|(n, c)| {
        (Just(n), (1..n).map(|i| 0..i).collect::<Vec<_>>(), prop::collection::vec(1..=c, n), Just(c))
    })
}

proptest! {
    #[test]
    fn tree_repair_is_minimal((n, parents, cur, c) in arb_tree()) {
        let edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
        let e64: Vec<(u64, u64)> = edges.iter().map(|&(a, b)| (a as u64, b as u64)).collect();
        let g = DynamicGraph::from_edges(0..n as u64, &e64);
        let comp = g.component(VertexId(0));
        let cur_by_comp: Vec<Option<u64>> = comp.iter().map(|v| Some(cur[v.0 as usize])).collect();
        let want = brute_min_changes(n, &edges, &cur.iter().map(|&x| Some(x)).collect::<Vec<_>>(), c).unwrap();

        let t = tree_min_repair(&g, &comp, &cur_by_comp, c);
        prop_assert!(proper(&g, &comp, &t));
        prop_assert!(t.iter().all(|&x| (1..=c).contains(&x)));
        prop_assert_eq!(changes(&comp, &cur_by_comp, &t), want);

        let b = bnb_min_repair(&g, &comp, &cur_by_comp, c).unwrap();
        prop_assert!(proper(&g, &comp, &b));
        prop_assert_eq!(changes(&comp, &cur_by_comp, &b), want);
    }

    #[test]
    fn bnb_repair_is_minimal_on_cyclic(n in 3usize..=7, keep in prop::collection::vec(any::<bool>(), 21), cur in prop::collection::vec(1u64..=3, 7)) {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        edges.extend(pairs.iter().zip(&keep).filter(|(p, k)| **k && p.1 != p.0 + 1).map(|(p, _)| *p));
        let e64: Vec<(u64, u64)> = edges.iter().map(|&(a, b)| (a as u64, b as u64)).collect();
        let g = DynamicGraph::from_edges(0..n as u64, &e64);
        let comp = g.component(VertexId(0));
        let cur_by_comp: Vec<Option<u64>> = comp.iter().map(|v| Some(cur[v.0 as usize])).collect();
        let want = brute_min_changes(n, &edges, &cur[..n].iter().map(|&x| Some(x)).collect::<Vec<_>>(), 3);
        let got = bnb_min_repair(&g, &comp, &cur_by_comp, 3);
        prop_assert_eq!(got.as_ref().map(|b| changes(&comp, &cur_by_comp, b)), want);
        if let Some(b) = got {
            prop_assert!(proper(&g, &comp, &b));
        }
    }
}

#[test]
fn c3_one_cycle_meets_floor() {
    for kind in [BaselineKind::MinimalRepair, BaselineKind::GreedyRepair] {
        let start = Instant::now();
        let (g, adv) = build_c3(19683).unwrap();
        let mut adv = adv.with_max_cycles(1);
        assert_eq!((adv.t(), adv.invalidation_floor(), adv.links_per_cycle(), adv.link_floor()), (27, 364, 4, 3));
        let mut alg = Baseline::new(kind, 3, g).unwrap();
        let out = arena_run(&mut adv, &mut alg, 2 * 27).unwrap();
        let cy = &out.ledger.cycles[0];
        assert!(cy.complete);
        assert!(cy.updates <= 27, "{kind}: cycle took {} updates", cy.updates);
        match cy.invalidation_cost {
            Some(cost) => assert!(cost >= 364, "{kind}: invalidation cost {cost}"),
            None => {
                assert_eq!(cy.link_costs.len(), 4);
                assert!(cy.link_costs.iter().all(|&x| x >= 3), "{kind}: {:?}", cy.link_costs);
            }
        }
        assert!(cy.recolorings <= out.observed_recolorings);
        assert!(start.elapsed().as_secs() < 10);
    }
}

#[test]
fn c3_several_cycles() {
    let (g, adv) = build_c3(19683).unwrap();
    let mut adv = adv.with_max_cycles(4);
    let mut alg = Baseline::new(BaselineKind::MinimalRepair, 3, g).unwrap();
    let out = arena_run(&mut adv, &mut alg, 1000).unwrap();
    assert_eq!(out.ledger.cycles.len(), 4);
    for cy in &out.ledger.cycles {
        assert!(cy.updates <= 27);
        assert!(
            cy.invalidation_cost.is_some_and(|c| c >= 364) || cy.link_costs.iter().filter(|&&x| x >= 3).count() >= 4
        );
    }
}

#[test]
fn c3_preconditions() {
    assert!(build_c3(1000).is_err());
    assert!(build_c3(27 * 27 * 26).is_err());
    assert!(build_c3(u64::MAX).is_err());
    assert!(build_c3(2_642_245u64.pow(3) + 1).is_err());
}

#[test]
fn floor_pow_ratio_is_exact() {
    for n in 1..3000u64 {
        for (p, q) in [(1, 2), (1, 3), (2, 3), (1, 6), (5, 6), (4, 6), (2, 12), (6, 6)] {
            let r = floor_pow_ratio(n, p, q).unwrap() as u128;
            let target = (n as u128).pow(p as u32);
            assert!(r.pow(q as u32) <= target && (r + 1).pow(q as u32) > target, "n={n} p={p} q={q}");
        }
    }
}

#[test]
fn general_params_closed_form() {
    assert_eq!(GeneralParams::smallest_feasible_n(3), Ok(8));
    assert_eq!(GeneralParams::smallest_feasible_n(4), Ok(64));
    assert_eq!(GeneralParams::smallest_feasible_n(2), Ok(2));
    for (c, n, alpha, ts) in [
        (2u64, 2u64, 48u64, vec![96u64, 6]),
        (3, 8, 1152, vec![9216, 192, 8]),
        (4, 64, 40960, vec![2621440, 20480, 320, 10]),
    ] {
        let p = GeneralParams::new(c, n).unwrap();
        assert_eq!(p.alpha, alpha);
        assert_eq!(p.t_k, ts);
        for k in 0..c as usize {
            // n is a perfect power here, so the floors are exact
            assert!((p.closed_form_t(k) - p.t(k) as f64).abs() < 1e-6, "c={c} k={k}");
            assert_eq!(p.n_k[k], floor_pow_ratio(n, 2 * (c - k as u64), c * (c - 1)).unwrap());
        }
        assert!(p.t(c as usize - 1) >= 2 * (c + 1));
        assert!(GeneralParams::with_alpha(c, n, alpha - 1).is_err());
    }
    assert!(GeneralParams::new(4, 63).is_err());
    let p = GeneralParams::new(3, 8).unwrap();
    assert_eq!((p.observation_bound(1), p.rounded_observation_bound(1)), (3, 3));
    assert_eq!((p.observation_bound(2), p.rounded_observation_bound(2)), (1, 2));
    assert_eq!(p.charge_scale(), 2);
}

fn check_general(c: u64, n: u64, alg: &mut dyn Recolorer, resets: usize) -> (u64, Vec<u8>) {
    let alpha = GeneralParams::min_alpha(c, n).unwrap();
    let (_, adv) = build_general(c, n, alpha).unwrap();
    let mut adv = adv.with_max_resets(resets);
    let out = arena_run(&mut adv, alg, u64::MAX).unwrap();
    let l = &out.ledger;
    assert!(l.resets.len() >= resets, "c={c}: {} resets", l.resets.len());
    assert!(l.charged_recolorings <= c * out.observed_recolorings);
    assert!(l.wasted_insertions <= out.insertions);
    assert_eq!(l.wasted_insertions, l.resets.iter().map(|r| r.h).sum::<u64>());
    assert!(out.deletions <= out.insertions);
    let st = adv.stats();
    assert!(st.blocked_checks >= resets as u64);
    assert!(st.observation_checks > 0 && st.audits > 0);
    assert!(st.top_links >= resets as u64);
    adv.audit(alg.state()).unwrap();
    let p = adv.params().clone();
    for k in 1..c as usize {
        for &id in adv.config(k) {
            let t = adv.tree(id);
            assert_eq!(t.level, k);
            assert_eq!(t.children.len() as u64 + 1, p.b(k), "level {k} tree {id}");
        }
        assert!(adv.config(k).len() as u64 <= p.t(k));
    }
    for b in adv.builds().iter().filter(|b| b.complete) {
        let t = p.t(b.level - 1);
        assert!(b.insertions <= t && b.insertions * 4 * c >= t, "level {} cost {} vs T={t}", b.level, b.insertions);
    }
    (out.observed_recolorings, l.resets.iter().map(|r| r.case).collect())
}

#[test]
fn general_c3_against_baselines() {
    for kind in [BaselineKind::MinimalRepair, BaselineKind::GreedyRepair] {
        let alpha = GeneralParams::min_alpha(3, 8).unwrap();
        let (g, _) = build_general(3, 8, alpha).unwrap();
        let mut alg = Baseline::new(kind, 3, g).unwrap();
        let (_, cases) = check_general(3, 8, &mut alg, 5);
        assert!(cases.contains(&1), "{kind}: {cases:?}");
    }
}

#[test]
fn general_c4_against_minimal_repair() {
    let alpha = GeneralParams::min_alpha(4, 64).unwrap();
    let (g, _) = build_general(4, 64, alpha).unwrap();
    let mut alg = Baseline::new(BaselineKind::MinimalRepair, 4, g).unwrap();
    check_general(4, 64, &mut alg, 3);
}

/// Repairs conflicts minimally, then recolors one random vertex near every new edge.
/// Its gratuitous recolorings violate subtree colors and drive the second reset case.
struct Churn {
    core: ColoredGraph,
    c: u64,
    rng: ChaCha8Rng,
}

impl Churn {
    fn new(graph: DynamicGraph, c: u64, seed: u64) -> Self {
        let mut core = ColoredGraph::new(graph);
        for v in core.graph.sorted_vertices() {
            assert!(core.graph.degree(v) == 0);
            core.assign(v, Color(1));
        }
        Churn { core, c, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn free_colors(&self, v: VertexId) -> Vec<u64> {
        let used: Vec<Option<Color>> = self.core.graph.neighbors(v).iter().map(|&w| self.core.color(w)).collect();
        (1..=self.c).filter(|&x| !used.contains(&Some(Color(x)))).collect()
    }

    fn repair(&mut self, v: VertexId) {
        let comp = self.core.graph.component(v);
        let cur: Vec<Option<u64>> = comp.iter().map(|&x| self.core.color(x).map(|c| c.0)).collect();
        let new = tree_min_repair(&self.core.graph, &comp, &cur, self.c);
        for (x, col) in comp.into_iter().zip(new) {
            self.core.assign(x, Color(col));
        }
    }
}

impl Recolorer for Churn {
    fn name(&self) -> String {
        "churn".into()
    }

    fn apply(&mut self, op: &UpdateOp) -> Result<u64, EngineError> {
        self.core.graph.validate(op)?;
        self.core.begin_update();
        self.core.graph.apply(op)?;
        match op {
            UpdateOp::InsertVertex(v, _) => {
                self.core.assign(*v, Color(1));
                self.repair(*v);
            }
            UpdateOp::DeleteVertex(v) => self.core.unassign(*v),
            UpdateOp::InsertEdge(u, v) => {
                if self.core.color(*u) == self.core.color(*v) {
                    self.repair(*u);
                }
                let comp = self.core.graph.component(*u);
                let x = comp[self.rng.random_range(0..comp.len())];
                let cur = self.core.color(x).map(|c| c.0);
                let opts: Vec<u64> = self.free_colors(x).into_iter().filter(|&c| Some(c) != cur).collect();
                if !opts.is_empty() {
                    let col = opts[self.rng.random_range(0..opts.len())];
                    self.core.assign(x, Color(col));
                }
            }
            UpdateOp::DeleteEdge(..) => {}
        }
        Ok(self.core.finish_update(op.is_insertion()))
    }

    fn state(&self) -> &ColoredGraph {
        &self.core
    }
}

#[test]
fn general_second_case_is_exercised() {
    let alpha = GeneralParams::min_alpha(3, 8).unwrap();
    let mut seen = Vec::new();
    for seed in 0..8 {
        let (g, _) = build_general(3, 8, alpha).unwrap();
        let mut alg = Churn::new(g, 3, seed);
        let (_, cases) = check_general(3, 8, &mut alg, 4);
        assert_eq!(alg.state().is_proper(), Ok(true));
        seen.extend(cases);
    }
    assert!(seen.contains(&2), "{seen:?}");
}

#[test]
fn adversary_rejects_extra_colors() {
    let (g, mut adv) = build_stars_c2(9).unwrap();
    let mut alg = Baseline::new(BaselineKind::GreedyRepair, 3, g).unwrap();
    assert_eq!(adv.c(), 2);
    assert!(arena_run(&mut adv, &mut alg, 100).is_err() || alg.state().metrics.distinct_colors_max <= 2);
}
