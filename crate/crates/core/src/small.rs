//! Amortized small-buckets engine: d levels of s buckets, capacity s^i, plus a reset bucket.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::colorers::StaticColorer;
use crate::engine::{
    ceil_root, color_bucket, pow_sat, BucketContent, EngineError, Layout, PaletteBook, Recolorer, SizePolicy,
};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::ColoredGraph;

/// Where a vertex lives. Orders level buckets before the reset bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BucketAddress {
    Level { level: u32, index: u32 },
    Reset,
}

#[derive(Clone, Debug)]
pub struct SmallBuckets {
    d: u32,
    s: u64,
    n_r: u64,
    epoch: u64,
    policy: SizePolicy,
    colorer: StaticColorer,
    levels: Vec<Vec<BTreeSet<VertexId>>>,
    nonempty: Vec<usize>,
    reset: BTreeSet<VertexId>,
    home: FxHashMap<VertexId, BucketAddress>,
    palettes: PaletteBook<BucketAddress>,
    core: ColoredGraph,
}

impl SmallBuckets {
    pub fn new(d: u32, initial: DynamicGraph, colorer: StaticColorer) -> Result<Self, EngineError> {
        Self::with_policy(d, initial, colorer, SizePolicy::Recompute)
    }

    pub fn with_policy(
        d: u32,
        initial: DynamicGraph,
        colorer: StaticColorer,
        policy: SizePolicy,
    ) -> Result<Self, EngineError> {
        if d == 0 {
            return Err(EngineError::InvalidParameter("d must be at least 1".into()));
        }
        let mut eng = SmallBuckets {
            d,
            s: 1,
            n_r: 0,
            epoch: 0,
            policy,
            colorer,
            levels: Vec::new(),
            nonempty: vec![0; d as usize],
            reset: BTreeSet::new(),
            home: FxHashMap::default(),
            palettes: PaletteBook::default(),
            core: ColoredGraph::new(initial),
        };
        eng.rebuild_into_reset()?;
        eng.epoch = 0;
        eng.core.refresh_distinct();
        Ok(eng)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_r(&self) -> u64 {
        self.n_r
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn home(&self, v: VertexId) -> Option<BucketAddress> {
        self.home.get(&v).copied()
    }

    pub fn bucket(&self, level: u32, index: u32) -> &BTreeSet<VertexId> {
        &self.levels[level as usize][index as usize]
    }

    pub fn reset_bucket(&self) -> &BTreeSet<VertexId> {
        &self.reset
    }

    pub fn capacity(&self, level: u32) -> u64 {
        pow_sat(self.s, level)
    }

    /// Index-free snapshot of the placement and palette-local colors.
    pub fn layout(&self) -> Layout {
        let content = |set: &BTreeSet<VertexId>| -> BucketContent {
            set.iter().map(|&v| (v, self.core.color(v).expect("colored").local())).collect()
        };
        Layout {
            reset: content(&self.reset),
            levels: self.levels.iter().map(|lvl| lvl.iter().filter(|b| !b.is_empty()).map(content).collect()).collect(),
        }
    }

    fn sized(&self, n: u64) -> u64 {
        let fresh = ceil_root(n, self.d).max(1);
        match self.policy {
            SizePolicy::Recompute => fresh,
            SizePolicy::NonDecreasing => fresh.max(self.s),
        }
    }

    /// Moves every vertex to the reset bucket and recolors the whole graph.
    fn rebuild_into_reset(&mut self) -> Result<(), EngineError> {
        let n = self.core.graph.vertex_count() as u64;
        self.s = self.sized(n);
        self.n_r = n;
        self.levels = vec![vec![BTreeSet::new(); self.s as usize]; self.d as usize];
        self.nonempty = vec![0; self.d as usize];
        self.reset = self.core.graph.vertices().collect();
        for &v in &self.reset {
            self.home.insert(v, BucketAddress::Reset);
        }
        let coloring =
            color_bucket(&mut self.core, &mut self.palettes, self.colorer, BucketAddress::Reset, &self.reset)?;
        for (v, c) in coloring {
            self.core.assign(v, c);
        }
        self.epoch += 1;
        self.core.metrics.s_history.push(self.s);
        Ok(())
    }

    fn reset(&mut self) -> Result<(), EngineError> {
        self.core.metrics.resets += 1;
        self.rebuild_into_reset()
    }

    fn detach(&mut self, v: VertexId) {
        match self.home.remove(&v) {
            Some(BucketAddress::Reset) => {
                self.reset.remove(&v);
            }
            Some(BucketAddress::Level { level, index }) => {
                let b = &mut self.levels[level as usize][index as usize];
                b.remove(&v);
                if b.is_empty() {
                    self.nonempty[level as usize] -= 1;
                }
            }
            None => {}
        }
    }

    fn place(&mut self, level: usize, index: usize, set: &BTreeSet<VertexId>) -> Result<(), EngineError> {
        let addr = BucketAddress::Level { level: level as u32, index: index as u32 };
        let b = &mut self.levels[level][index];
        if b.is_empty() && !set.is_empty() {
            self.nonempty[level] += 1;
        }
        b.extend(set.iter().copied());
        for &v in set {
            self.home.insert(v, addr);
        }
        let coloring = color_bucket(&mut self.core, &mut self.palettes, self.colorer, addr, set)?;
        for (v, c) in coloring {
            self.core.assign(v, c);
        }
        Ok(())
    }

    fn empty_bucket(&self, level: usize) -> Result<usize, EngineError> {
        self.levels[level]
            .iter()
            .position(BTreeSet::is_empty)
            .ok_or_else(|| EngineError::InvariantViolation(format!("no empty bucket on level {level}")))
    }

    fn insert(&mut self, v: VertexId) -> Result<(), EngineError> {
        let idx = self.empty_bucket(0)?;
        self.place(0, idx, &BTreeSet::from([v]))?;
        let s = self.s as usize;
        let mut level = 0;
        while self.nonempty[level] == s {
            if level + 1 == self.d as usize {
                return self.reset();
            }
            let mut moved = BTreeSet::new();
            for b in &mut self.levels[level] {
                moved.append(b);
            }
            self.nonempty[level] = 0;
            let dest = self.empty_bucket(level + 1)?;
            self.place(level + 1, dest, &moved)?;
            level += 1;
        }
        Ok(())
    }

    /// Endpoint to reinsert on a monochromatic edge: lower level first, then smaller id.
    fn pick_endpoint(&self, u: VertexId, v: VertexId) -> VertexId {
        let rank = |x: VertexId| (level_rank(self.home[&x]), x);
        if rank(u) <= rank(v) {
            u
        } else {
            v
        }
    }
}

/// Level of an address, with the reset bucket above every level.
pub(crate) fn level_rank(a: BucketAddress) -> u32 {
    match a {
        BucketAddress::Level { level, .. } => level,
        BucketAddress::Reset => u32::MAX,
    }
}

impl Recolorer for SmallBuckets {
    fn name(&self) -> String {
        "small".into()
    }

    fn apply(&mut self, op: &UpdateOp) -> Result<u64, EngineError> {
        self.core.graph.validate(op)?;
        self.core.begin_update();
        let mut insertion = false;
        match op {
            UpdateOp::InsertVertex(v, _) => {
                self.core.graph.apply(op)?;
                self.insert(*v)?;
                insertion = true;
            }
            UpdateOp::DeleteVertex(v) => {
                self.detach(*v);
                self.core.graph.apply(op)?;
                self.core.unassign(*v);
            }
            UpdateOp::InsertEdge(u, v) => {
                self.core.graph.apply(op)?;
                if self.core.color(*u) == self.core.color(*v) {
                    let w = self.pick_endpoint(*u, *v);
                    self.detach(w);
                    self.insert(w)?;
                    insertion = true;
                }
            }
            UpdateOp::DeleteEdge(..) => self.core.graph.apply(op)?,
        }
        Ok(self.core.finish_update(insertion))
    }

    fn state(&self) -> &ColoredGraph {
        &self.core
    }

    fn check_invariants(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvariantViolation(m));
        if self.home.len() != self.core.graph.vertex_count() {
            return bad(format!("{} homed vs {} live", self.home.len(), self.core.graph.vertex_count()));
        }
        let mut seen = 0usize;
        for (i, lvl) in self.levels.iter().enumerate() {
            if lvl.len() != self.s as usize {
                return bad(format!("level {i} has {} buckets, s = {}", lvl.len(), self.s));
            }
            let cap = pow_sat(self.s, i as u32);
            let mut nonempty = 0;
            for (j, b) in lvl.iter().enumerate() {
                if b.len() as u64 > cap {
                    return bad(format!("bucket ({i},{j}) holds {} > capacity {cap}", b.len()));
                }
                nonempty += usize::from(!b.is_empty());
                let addr = BucketAddress::Level { level: i as u32, index: j as u32 };
                for &v in b {
                    if self.home.get(&v) != Some(&addr) {
                        return bad(format!("vertex {v} misfiled in ({i},{j})"));
                    }
                    let c = self.core.color(v).expect("colored");
                    if !self.palettes.contains(addr, c) {
                        return bad(format!("vertex {v} color {c} outside palette of ({i},{j})"));
                    }
                }
                seen += b.len();
            }
            if nonempty != self.nonempty[i] {
                return bad(format!("level {i} nonempty count drifted"));
            }
            if nonempty == lvl.len() {
                return bad(format!("space invariant broken on level {i}"));
            }
        }
        for &v in &self.reset {
            if self.home.get(&v) != Some(&BucketAddress::Reset) {
                return bad(format!("vertex {v} misfiled in reset bucket"));
            }
            let c = self.core.color(v).expect("colored");
            if !self.palettes.contains(BucketAddress::Reset, c) {
                return bad(format!("vertex {v} color {c} outside reset palette"));
            }
        }
        seen += self.reset.len();
        if seen != self.home.len() {
            return bad("buckets do not partition the vertices".into());
        }
        Ok(())
    }

    fn color_budget(&self) -> Option<u64> {
        let c = self.core.metrics.bucket_colors_max;
        Some((1 + self.d as u64 * (self.s - 1)) * c)
    }

    fn s(&self) -> Option<u64> {
        Some(self.s)
    }
}
