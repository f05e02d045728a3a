//! De-amortized big-buckets engine: at most (d + 1)s real recolorings per update.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::audit::{lemma, AuditReport, EventLog, LemmaViolation};
use super::overlay::{Placement, ShadowOverlay};
use crate::big::high_point;
use crate::colorers::StaticColorer;
use crate::engine::{ceil_root, color_bucket, BucketContent, EngineError, Layout, PaletteBook, Recolorer};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::{check_proper, ColoredGraph};

/// Each level has two physical sides; roles swap between primary and secondary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BigDeamAddress {
    Level { level: u32, side: u8 },
    Reset(u8),
}

fn rank(a: BigDeamAddress) -> u32 {
    match a {
        BigDeamAddress::Level { level, .. } => level,
        BigDeamAddress::Reset(_) => u32::MAX,
    }
}

#[derive(Clone, Debug)]
pub struct DeamBig {
    d: u32,
    s: u64,
    n_r: u64,
    epoch: u64,
    colorer: StaticColorer,
    primary_side: Vec<u8>,
    primary_reset: u8,
    overlay: ShadowOverlay<BigDeamAddress>,
    palettes: PaletteBook<BigDeamAddress>,
    core: ColoredGraph,
    events: EventLog,
}

impl DeamBig {
    pub fn new(d: u32, initial: DynamicGraph, colorer: StaticColorer) -> Result<Self, EngineError> {
        if d == 0 {
            return Err(EngineError::InvalidParameter("d must be at least 1".into()));
        }
        let n = initial.vertex_count() as u64;
        let mut eng = DeamBig {
            d,
            s: ceil_root(n, d).max(2),
            n_r: n,
            epoch: 0,
            colorer,
            primary_side: vec![0; d as usize],
            primary_reset: 0,
            overlay: ShadowOverlay::default(),
            palettes: PaletteBook::default(),
            core: ColoredGraph::new(initial),
            events: EventLog::default(),
        };
        let all: BTreeSet<_> = eng.core.graph.vertices().collect();
        let addr = BigDeamAddress::Reset(0);
        let coloring = color_bucket(&mut eng.core, &mut eng.palettes, colorer, addr, &all)?;
        for (v, c) in coloring {
            eng.overlay.place(v, Placement { addr, color: c });
            eng.core.assign(v, c);
        }
        eng.core.metrics.s_history.push(eng.s);
        eng.core.refresh_distinct();
        Ok(eng)
    }

    pub fn overlay(&self) -> &ShadowOverlay<BigDeamAddress> {
        &self.overlay
    }

    pub fn primary(&self, level: usize) -> BigDeamAddress {
        BigDeamAddress::Level { level: level as u32, side: self.primary_side[level] }
    }

    pub fn secondary(&self, level: usize) -> BigDeamAddress {
        BigDeamAddress::Level { level: level as u32, side: 1 - self.primary_side[level] }
    }

    pub fn primary_reset(&self) -> BigDeamAddress {
        BigDeamAddress::Reset(self.primary_reset)
    }

    pub fn secondary_reset(&self) -> BigDeamAddress {
        BigDeamAddress::Reset(1 - self.primary_reset)
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    fn digest(&self) -> String {
        let sizes: Vec<_> = (0..self.d as usize)
            .map(|j| (self.overlay.sim_count(self.primary(j)), self.overlay.real_count(self.secondary(j))))
            .collect();
        format!(
            "update={} s={} epoch={} shadows={} (primary sims, secondary reals)={sizes:?}",
            self.core.current_update(),
            self.s,
            self.epoch,
            self.overlay.shadow_count()
        )
    }

    fn violation(&self, lemma: &'static str, detail: String) -> LemmaViolation {
        LemmaViolation { lemma, detail, digest: self.digest() }
    }

    pub fn sim_layout(&self) -> Layout {
        let content = |set: &BTreeSet<VertexId>| -> BucketContent {
            set.iter().map(|&v| (v, self.overlay.sim(v).expect("sim").color.local())).collect()
        };
        Layout {
            reset: self.overlay.sims_in(self.primary_reset()).map(content).unwrap_or_default(),
            levels: (0..self.d as usize)
                .map(|j| self.overlay.sims_in(self.primary(j)).map(content).into_iter().collect())
                .collect(),
        }
    }

    pub fn real_layout(&self) -> Layout {
        let content = |set: &BTreeSet<VertexId>| -> BucketContent {
            set.iter().map(|&v| (v, self.core.color(v).expect("colored").local())).collect()
        };
        let mut levels = vec![BTreeSet::new(); self.d as usize];
        let mut reset = BucketContent::new();
        for (a, set) in self.overlay.real_buckets() {
            match a {
                BigDeamAddress::Level { level, .. } => {
                    levels[*level as usize].insert(content(set));
                }
                BigDeamAddress::Reset(_) => reset.extend(content(set)),
            }
        }
        Layout { reset, levels }
    }

    fn sim_color(&mut self, addr: BigDeamAddress, subset: &BTreeSet<VertexId>) -> Result<(), EngineError> {
        let coloring = color_bucket(&mut self.core, &mut self.palettes, self.colorer, addr, subset)?;
        for (v, color) in coloring {
            self.overlay.set_sim(v, Placement { addr, color });
        }
        Ok(())
    }

    fn require_empty(&mut self, a: BigDeamAddress, l: &'static str) -> Result<(), EngineError> {
        let n = self.overlay.real_count(a) + self.overlay.sim_count(a);
        if n > 0 {
            let viol = self.violation(l, format!("{a:?} holds {n} vertices when it must be empty"));
            self.events.fail(viol.clone());
            return Err(EngineError::InvariantViolation(viol.to_string()));
        }
        self.events.pass(l);
        Ok(())
    }

    fn sim_insert(&mut self, v: VertexId) -> Result<(), EngineError> {
        let mut total = 1u64;
        let mut target = None;
        for i in 0..self.d as usize {
            total += self.overlay.sim_count(self.primary(i)) as u64;
            if total <= high_point(self.s, i as u32) {
                target = Some(i);
                break;
            }
        }
        let Some(i) = target else {
            return self.sim_reset();
        };
        for j in 0..=i {
            self.require_empty(self.secondary(j), lemma::SECONDARY_EMPTY_ON_PLACE)?;
        }
        let mut set = BTreeSet::from([v]);
        for j in 0..=i {
            if let Some(sims) = self.overlay.sims_in(self.primary(j)) {
                set.extend(sims.iter().copied());
            }
        }
        self.sim_color(self.secondary(i), &set)?;
        for side in &mut self.primary_side[..=i] {
            *side = 1 - *side;
        }
        Ok(())
    }

    fn sim_reset(&mut self) -> Result<(), EngineError> {
        self.require_empty(self.secondary_reset(), lemma::SECONDARY_RESET_EMPTY)?;
        for j in 0..self.d as usize {
            self.require_empty(self.secondary(j), lemma::SECONDARY_EMPTY_ON_PLACE)?;
        }
        let n = self.core.graph.vertex_count() as u64;
        self.n_r = n;
        self.s = self.s.max(ceil_root(n, self.d).max(2));
        let all: BTreeSet<_> = self.core.graph.vertices().collect();
        self.sim_color(self.secondary_reset(), &all)?;
        self.primary_reset = 1 - self.primary_reset;
        for side in &mut self.primary_side {
            *side = 1 - *side;
        }
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

    fn drain(&mut self, a: BigDeamAddress, k: usize) {
        let picks: Vec<_> =
            self.overlay.reals_in(a).map(|set| set.iter().take(k).copied().collect()).unwrap_or_default();
        for v in picks {
            self.realize(v);
        }
    }

    fn move_step(&mut self, inserted: VertexId) {
        self.realize(inserted);
        let s = self.s as usize;
        for j in 0..self.d as usize {
            self.drain(self.secondary(j), if j == 0 { s - 1 } else { s });
        }
        self.drain(self.secondary_reset(), s);
    }

    fn cap(&self) -> u64 {
        (self.d as u64 + 1) * self.s
    }

    pub fn audit_lemmas(&self) -> Result<AuditReport, LemmaViolation> {
        if let Some(v) = &self.events.first_violation {
            return Err(v.clone());
        }
        let mut report = AuditReport { exercised: self.events.counts.clone() };
        let mut pass = |l: &'static str| *report.exercised.entry(l).or_insert(0) += 1;
        let fail = |l: &'static str, detail: String| Err(self.violation(l, detail));
        let ov = &self.overlay;

        let mut secondaries: Vec<_> = (0..self.d as usize).map(|j| self.secondary(j)).collect();
        secondaries.push(self.secondary_reset());
        for a in secondaries {
            if ov.sim_count(a) > 0 {
                return fail(lemma::SECONDARY_CONTENTS, format!("{a:?} holds simulated vertices"));
            }
            for &v in ov.reals_in(a).into_iter().flatten() {
                if !ov.has_shadow(v) {
                    return fail(lemma::SECONDARY_CONTENTS, format!("vertex {v} in {a:?} has no shadow"));
                }
            }
        }
        let mut primaries: Vec<_> = (0..self.d as usize).map(|j| self.primary(j)).collect();
        primaries.push(self.primary_reset());
        for a in primaries {
            for &v in ov.reals_in(a).into_iter().flatten() {
                if ov.has_shadow(v) {
                    return fail(lemma::SECONDARY_CONTENTS, format!("vertex {v} in primary {a:?} has a shadow"));
                }
            }
        }
        if ov.real_count(self.secondary(0)) > 0 {
            return fail(lemma::SECONDARY_CONTENTS, "level-0 secondary not drained".into());
        }
        pass(lemma::SECONDARY_CONTENTS);

        for j in 0..self.d as usize {
            let hp = high_point(self.s, j as u32) as usize;
            if ov.sim_count(self.primary(j)) > hp {
                return fail(
                    lemma::HIGH_POINT,
                    format!("level {j} simulates {} > {hp}", ov.sim_count(self.primary(j))),
                );
            }
        }
        pass(lemma::HIGH_POINT);

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
        if self.core.metrics.max_per_update > self.cap() {
            return fail(lemma::BUDGET, format!("{} recolorings in one update", self.core.metrics.max_per_update));
        }
        pass(lemma::BUDGET);
        Ok(report)
    }
}

impl Recolorer for DeamBig {
    fn name(&self) -> String {
        "big-deam".into()
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
                self.overlay.remove(*v);
                self.core.graph.apply(op)?;
                self.core.unassign(*v);
            }
            UpdateOp::InsertEdge(u, v) => {
                self.core.graph.apply(op)?;
                let (su, sv) = (self.overlay.sim(*u).expect("sim"), self.overlay.sim(*v).expect("sim"));
                if su.color == sv.color {
                    let w = if (rank(su.addr), *u) <= (rank(sv.addr), *v) { *u } else { *v };
                    self.overlay.clear_sim(w);
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
        if self.core.pending() > self.cap() {
            return Err(EngineError::InvariantViolation(format!(
                "{} real recolorings exceed the budget {}",
                self.core.pending(),
                self.cap()
            )));
        }
        Ok(self.core.finish_update(insertion))
    }

    fn state(&self) -> &ColoredGraph {
        &self.core
    }

    fn check_invariants(&self) -> Result<(), EngineError> {
        self.audit_lemmas().map(|_| ()).map_err(|v| EngineError::InvariantViolation(v.to_string()))
    }

    fn color_budget(&self) -> Option<u64> {
        Some(2 * (self.d as u64 + 1) * self.core.metrics.bucket_colors_max)
    }

    fn per_update_cap(&self) -> Option<u64> {
        Some(self.cap())
    }

    fn s(&self) -> Option<u64> {
        Some(self.s)
    }
}
