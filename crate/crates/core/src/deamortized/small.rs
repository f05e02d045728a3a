//! De-amortized small-buckets engine: at most d + 2 real recolorings per update.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::audit::{lemma, AuditReport, EventLog, LemmaViolation};
use super::overlay::{Placement, ShadowOverlay};
use crate::colorers::StaticColorer;
use crate::engine::{ceil_root, color_bucket, pow_sat, BucketContent, EngineError, Layout, PaletteBook, Recolorer};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::{check_proper, ColoredGraph};

/// Level buckets, then the two physical reset buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DeamAddress {
    Level { level: u32, index: u32 },
    Reset(u8),
}

fn lvl(level: usize, index: usize) -> DeamAddress {
    DeamAddress::Level { level: level as u32, index: index as u32 }
}

fn rank(a: DeamAddress) -> u32 {
    match a {
        DeamAddress::Level { level, .. } => level,
        DeamAddress::Reset(_) => u32::MAX,
    }
}

#[derive(Clone, Debug)]
pub struct DeamSmall {
    d: u32,
    s: u64,
    n_r: u64,
    epoch: u64,
    colorer: StaticColorer,
    primary_reset: u8,
    overlay: ShadowOverlay<DeamAddress>,
    sim_nonempty: Vec<usize>,
    palettes: PaletteBook<DeamAddress>,
    core: ColoredGraph,
    sim_insertions: u64,
    last_full: Vec<u64>,
    events: EventLog,
}

impl DeamSmall {
    pub fn new(d: u32, initial: DynamicGraph, colorer: StaticColorer) -> Result<Self, EngineError> {
        if d == 0 {
            return Err(EngineError::InvalidParameter("d must be at least 1".into()));
        }
        let n = initial.vertex_count() as u64;
        let mut eng = DeamSmall {
            d,
            s: ceil_root(n, d).max(1),
            n_r: n,
            epoch: 0,
            colorer,
            primary_reset: 0,
            overlay: ShadowOverlay::default(),
            sim_nonempty: vec![0; d as usize],
            palettes: PaletteBook::default(),
            core: ColoredGraph::new(initial),
            sim_insertions: 0,
            last_full: vec![0; d as usize],
            events: EventLog::default(),
        };
        let all: BTreeSet<_> = eng.core.graph.vertices().collect();
        let addr = DeamAddress::Reset(0);
        let coloring = color_bucket(&mut eng.core, &mut eng.palettes, colorer, addr, &all)?;
        for (v, c) in coloring {
            eng.overlay.place(v, Placement { addr, color: c });
            eng.core.assign(v, c);
        }
        eng.core.metrics.s_history.push(eng.s);
        eng.core.refresh_distinct();
        Ok(eng)
    }

    pub fn overlay(&self) -> &ShadowOverlay<DeamAddress> {
        &self.overlay
    }

    pub fn primary_reset(&self) -> DeamAddress {
        DeamAddress::Reset(self.primary_reset)
    }

    pub fn secondary_reset(&self) -> DeamAddress {
        DeamAddress::Reset(1 - self.primary_reset)
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn n_r(&self) -> u64 {
        self.n_r
    }

    fn digest(&self) -> String {
        format!(
            "update={} s={} epoch={} shadows={} sim_nonempty={:?}",
            self.core.current_update(),
            self.s,
            self.epoch,
            self.overlay.shadow_count(),
            self.sim_nonempty
        )
    }

    fn violation(&self, lemma: &'static str, detail: String) -> LemmaViolation {
        LemmaViolation { lemma, detail, digest: self.digest() }
    }

    fn totally_empty(&self, a: DeamAddress) -> bool {
        self.overlay.sim_count(a) == 0 && self.overlay.real_count(a) == 0
    }

    fn first_totally_empty(&self, level: usize) -> Option<usize> {
        (0..self.s as usize).find(|&j| self.totally_empty(lvl(level, j)))
    }

    fn level_range(level: usize) -> std::ops::RangeInclusive<DeamAddress> {
        lvl(level, 0)..=DeamAddress::Level { level: level as u32, index: u32::MAX }
    }

    /// Simulated placement and palette-local colors, in the amortized engine's terms.
    pub fn sim_layout(&self) -> Layout {
        let content = |set: &BTreeSet<VertexId>| -> BucketContent {
            set.iter().map(|&v| (v, self.overlay.sim(v).expect("sim").color.local())).collect()
        };
        let mut levels = vec![BTreeSet::new(); self.d as usize];
        for (a, set) in self.overlay.sim_buckets() {
            if let DeamAddress::Level { level, .. } = a {
                levels[*level as usize].insert(content(set));
            }
        }
        Layout { reset: self.overlay.sims_in(self.primary_reset()).map(content).unwrap_or_default(), levels }
    }

    /// Real placement in the same terms; equals `sim_layout` once no shadows remain.
    pub fn real_layout(&self) -> Layout {
        let content = |set: &BTreeSet<VertexId>| -> BucketContent {
            set.iter().map(|&v| (v, self.core.color(v).expect("colored").local())).collect()
        };
        let mut levels = vec![BTreeSet::new(); self.d as usize];
        let mut reset = BucketContent::new();
        for (a, set) in self.overlay.real_buckets() {
            match a {
                DeamAddress::Level { level, .. } => {
                    levels[*level as usize].insert(content(set));
                }
                DeamAddress::Reset(_) => reset.extend(content(set)),
            }
        }
        Layout { reset, levels }
    }

    fn sim_color(&mut self, addr: DeamAddress, subset: &BTreeSet<VertexId>) -> Result<(), EngineError> {
        let coloring = color_bucket(&mut self.core, &mut self.palettes, self.colorer, addr, subset)?;
        for (v, color) in coloring {
            self.overlay.set_sim(v, Placement { addr, color });
        }
        Ok(())
    }

    fn drop_sim(&mut self, v: VertexId) {
        if let Some(p) = self.overlay.clear_sim(v) {
            if let DeamAddress::Level { level, .. } = p.addr {
                if self.overlay.sim_count(p.addr) == 0 {
                    self.sim_nonempty[level as usize] -= 1;
                }
            }
        }
    }

    fn sim_insert(&mut self, v: VertexId) -> Result<(), EngineError> {
        self.sim_insertions += 1;
        let Some(j) = self.first_totally_empty(0) else {
            let v = self.violation(lemma::EMPTY_LEVEL0, "no empty level-0 bucket on insertion".into());
            return Err(EngineError::InvariantViolation(v.to_string()));
        };
        self.sim_color(lvl(0, j), &BTreeSet::from([v]))?;
        self.sim_nonempty[0] += 1;
        let s = self.s as usize;
        let mut level = 0;
        while self.sim_nonempty[level] == s {
            let since = self.sim_insertions - self.last_full[level];
            let need = pow_sat(self.s, level as u32 + 1);
            if since >= need {
                self.events.pass(lemma::REFILL_INTERVAL);
            } else {
                let viol = self.violation(
                    lemma::REFILL_INTERVAL,
                    format!("level {level} refilled after {since} < {need} insertions"),
                );
                self.events.fail(viol);
            }
            self.last_full[level] = self.sim_insertions;
            if level + 1 == self.d as usize {
                return self.sim_reset();
            }
            let mut moved = BTreeSet::new();
            for (_, set) in self.overlay.sim_range(Self::level_range(level)) {
                moved.extend(set.iter().copied());
            }
            self.sim_nonempty[level] = 0;
            let Some(dest) = self.first_totally_empty(level + 1) else {
                let viol =
                    self.violation(lemma::EMPTY_DESTINATION, format!("no empty destination on level {}", level + 1));
                self.events.fail(viol.clone());
                return Err(EngineError::InvariantViolation(viol.to_string()));
            };
            self.events.pass(lemma::EMPTY_DESTINATION);
            self.sim_color(lvl(level + 1, dest), &moved)?;
            self.sim_nonempty[level + 1] += 1;
            level += 1;
        }
        Ok(())
    }

    fn sim_reset(&mut self) -> Result<(), EngineError> {
        let sec = self.secondary_reset();
        if self.overlay.real_count(sec) > 0 {
            let viol = self.violation(
                lemma::SECONDARY_RESET_EMPTY,
                format!("{} reals left in the secondary reset bucket", self.overlay.real_count(sec)),
            );
            self.events.fail(viol.clone());
            return Err(EngineError::InvariantViolation(viol.to_string()));
        }
        self.events.pass(lemma::SECONDARY_RESET_EMPTY);
        let n = self.core.graph.vertex_count() as u64;
        self.n_r = n;
        self.s = self.s.max(ceil_root(n, self.d));
        let all: BTreeSet<_> = self.core.graph.vertices().collect();
        self.sim_color(sec, &all)?;
        self.primary_reset = 1 - self.primary_reset;
        self.sim_nonempty.iter_mut().for_each(|c| *c = 0);
        self.last_full.iter_mut().for_each(|t| *t = self.sim_insertions);
        self.epoch += 1;
        self.core.metrics.resets += 1;
        self.core.metrics.s_history.push(self.s);
        Ok(())
    }

    fn realize(&mut self, v: VertexId) {
        if let Some(p) = self.overlay.realize(v) {
            self.core.assign(v, p.color);
        }
    }

    fn move_step(&mut self, inserted: VertexId) {
        self.realize(inserted);
        for level in 0..self.d as usize {
            let pick = self
                .overlay
                .real_range(Self::level_range(level))
                .filter(|(a, _)| self.overlay.sim_count(**a) == 0)
                .min_by_key(|(a, set)| (set.len(), **a))
                .and_then(|(_, set)| set.first().copied());
            if let Some(v) = pick {
                self.realize(v);
            }
        }
        if let Some(v) = self.overlay.reals_in(self.secondary_reset()).and_then(|s| s.first().copied()) {
            self.realize(v);
        }
    }

    /// Checks every lemma that can be observed between updates.
    pub fn audit_lemmas(&self) -> Result<AuditReport, LemmaViolation> {
        if let Some(v) = &self.events.first_violation {
            return Err(v.clone());
        }
        let mut report = AuditReport { exercised: self.events.counts.clone() };
        let mut pass = |l: &'static str| *report.exercised.entry(l).or_insert(0) += 1;
        let fail = |l: &'static str, detail: String| Err(self.violation(l, detail));
        let s = self.s as usize;
        let ov = &self.overlay;

        if self.first_totally_empty(0).is_none() {
            return fail(lemma::EMPTY_LEVEL0, "level 0 has no empty bucket".into());
        }
        pass(lemma::EMPTY_LEVEL0);

        for i in 0..self.d as usize - 1 {
            let t = self.sim_insertions - self.last_full[i];
            let bound = pow_sat(self.s, i as u32 + 1).saturating_sub(t) as usize;
            let ok = (0..s).any(|j| {
                let a = lvl(i + 1, j);
                ov.sim_count(a) == 0 && ov.real_count(a) <= bound
            });
            if !ok {
                return fail(
                    lemma::DRAIN_BOUND,
                    format!("level {} has no sim-empty bucket with <= {bound} reals", i + 1),
                );
            }
            pass(lemma::DRAIN_BOUND);
        }

        for i in 0..self.d as usize {
            let cap = pow_sat(self.s, i as u32) as usize;
            let mut nonempty = 0;
            for (a, set) in ov.sim_range(Self::level_range(i)) {
                nonempty += 1;
                if set.len() > cap || ov.real_count(*a) > cap {
                    return fail(lemma::SIM_CAPACITY, format!("bucket {a:?} over capacity {cap}"));
                }
            }
            for (a, set) in ov.real_range(Self::level_range(i)) {
                if set.len() > cap {
                    return fail(lemma::SIM_CAPACITY, format!("real bucket {a:?} over capacity {cap}"));
                }
            }
            if nonempty != self.sim_nonempty[i] || nonempty >= s {
                return fail(lemma::SIM_SPACE, format!("level {i}: {nonempty} of {s} buckets simulated"));
            }
        }
        pass(lemma::SIM_CAPACITY);
        pass(lemma::SIM_SPACE);

        let sec = self.secondary_reset();
        if ov.sim_count(sec) > 0 {
            return fail(lemma::SECONDARY_CONTENTS, "secondary reset bucket holds simulated vertices".into());
        }
        for &v in ov.reals_in(sec).into_iter().flatten() {
            if ov.shadow(v).map(|p| p.addr) != Some(self.primary_reset()) {
                return fail(
                    lemma::SECONDARY_CONTENTS,
                    format!("vertex {v} in secondary reset lacks a primary shadow"),
                );
            }
        }
        pass(lemma::SECONDARY_CONTENTS);

        for (u, v) in self.core.graph.edges() {
            if ov.sim(u).map(|p| p.color) == ov.sim(v).map(|p| p.color) {
                return fail(lemma::SIM_PROPER, format!("edge {u}-{v} monochromatic in the simulation"));
            }
        }
        pass(lemma::SIM_PROPER);
        if !check_proper(&self.core.graph, &self.core.ledger).unwrap_or(false) {
            return fail(lemma::REAL_PROPER, "real coloring not proper".into());
        }
        pass(lemma::REAL_PROPER);

        if self.core.metrics.s_history.windows(2).any(|w| w[1] < w[0]) {
            return fail(lemma::S_MONOTONE, format!("s history {:?}", self.core.metrics.s_history));
        }
        pass(lemma::S_MONOTONE);
        if self.core.metrics.max_per_update > self.d as u64 + 2 {
            return fail(lemma::BUDGET, format!("{} recolorings in one update", self.core.metrics.max_per_update));
        }
        pass(lemma::BUDGET);
        Ok(report)
    }

    fn check_budget(&self) -> Result<(), EngineError> {
        let cap = self.d as u64 + 2;
        if self.core.pending() > cap {
            return Err(EngineError::InvariantViolation(format!(
                "{} real recolorings exceed the budget {cap}",
                self.core.pending()
            )));
        }
        Ok(())
    }
}

impl Recolorer for DeamSmall {
    fn name(&self) -> String {
        "small-deam".into()
    }

    fn apply(&mut self, op: &UpdateOp) -> Result<u64, EngineError> {
        self.core.graph.validate(op)?;
        self.core.begin_update();
        let mut insertion = false;
        match op {
            UpdateOp::InsertVertex(v, _) => {
                self.core.graph.apply(op)?;
                self.sim_insert(*v)?;
                self.move_step(*v);
                insertion = true;
            }
            UpdateOp::DeleteVertex(v) => {
                self.drop_sim(*v);
                self.overlay.remove(*v);
                self.core.graph.apply(op)?;
                self.core.unassign(*v);
            }
            UpdateOp::InsertEdge(u, v) => {
                self.core.graph.apply(op)?;
                let (su, sv) = (self.overlay.sim(*u).expect("sim"), self.overlay.sim(*v).expect("sim"));
                if su.color == sv.color {
                    let w = if (rank(su.addr), *u) <= (rank(sv.addr), *v) { *u } else { *v };
                    self.drop_sim(w);
                    self.sim_insert(w)?;
                    self.move_step(w);
                    insertion = true;
                } else if self.core.color(*u) == self.core.color(*v) {
                    let x = [*u, *v].into_iter().find(|&x| self.overlay.has_shadow(x)).ok_or_else(|| {
                        EngineError::InvariantViolation(format!("real conflict {u}-{v} without shadows"))
                    })?;
                    self.realize(x);
                }
            }
            UpdateOp::DeleteEdge(..) => self.core.graph.apply(op)?,
        }
        self.check_budget()?;
        Ok(self.core.finish_update(insertion))
    }

    fn state(&self) -> &ColoredGraph {
        &self.core
    }

    fn check_invariants(&self) -> Result<(), EngineError> {
        self.audit_lemmas().map(|_| ()).map_err(|v| EngineError::InvariantViolation(v.to_string()))
    }

    fn color_budget(&self) -> Option<u64> {
        Some((2 + self.d as u64 * (self.s - 1)) * self.core.metrics.bucket_colors_max)
    }

    fn per_update_cap(&self) -> Option<u64> {
        Some(self.d as u64 + 2)
    }

    fn s(&self) -> Option<u64> {
        Some(self.s)
    }
}
