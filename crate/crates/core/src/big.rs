//! Amortized big-buckets engine: d buckets, bucket i holding at most s^{i+1} - s^i vertices.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::colorers::StaticColorer;
use crate::engine::{
    ceil_root, color_bucket, pow_sat, BucketContent, EngineError, Layout, PaletteBook, Recolorer, SizePolicy,
};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::ColoredGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BigAddress {
    Bucket(u32),
    Reset,
}

/// High point of bucket `i`: `s^{i+1} - s^i`.
pub fn high_point(s: u64, i: u32) -> u64 {
    pow_sat(s, i + 1).saturating_sub(pow_sat(s, i))
}

#[derive(Clone, Debug)]
pub struct BigBuckets {
    d: u32,
    s: u64,
    s_max: u64,
    n_r: u64,
    epoch: u64,
    policy: SizePolicy,
    colorer: StaticColorer,
    buckets: Vec<BTreeSet<VertexId>>,
    reset: BTreeSet<VertexId>,
    home: FxHashMap<VertexId, BigAddress>,
    palettes: PaletteBook<BigAddress>,
    core: ColoredGraph,
}

impl BigBuckets {
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
        let mut eng = BigBuckets {
            d,
            s: 2,
            s_max: 2,
            n_r: 0,
            epoch: 0,
            policy,
            colorer,
            buckets: vec![BTreeSet::new(); d as usize],
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

    pub fn s_max(&self) -> u64 {
        self.s_max
    }

    pub fn n_r(&self) -> u64 {
        self.n_r
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn bucket(&self, i: u32) -> &BTreeSet<VertexId> {
        &self.buckets[i as usize]
    }

    pub fn reset_bucket(&self) -> &BTreeSet<VertexId> {
        &self.reset
    }

    pub fn home(&self, v: VertexId) -> Option<BigAddress> {
        self.home.get(&v).copied()
    }

    pub fn layout(&self) -> Layout {
        let content = |set: &BTreeSet<VertexId>| -> BucketContent {
            set.iter().map(|&v| (v, self.core.color(v).expect("colored").local())).collect()
        };
        Layout {
            reset: content(&self.reset),
            levels: self
                .buckets
                .iter()
                .map(|b| if b.is_empty() { BTreeSet::new() } else { BTreeSet::from([content(b)]) })
                .collect(),
        }
    }

    fn sized(&self, n: u64) -> u64 {
        let fresh = ceil_root(n, self.d).max(2);
        match self.policy {
            SizePolicy::Recompute => fresh,
            SizePolicy::NonDecreasing => fresh.max(self.s),
        }
    }

    fn rebuild_into_reset(&mut self) -> Result<(), EngineError> {
        let n = self.core.graph.vertex_count() as u64;
        self.s = self.sized(n);
        self.s_max = self.s_max.max(self.s);
        self.n_r = n;
        for b in &mut self.buckets {
            b.clear();
        }
        self.reset = self.core.graph.vertices().collect();
        for &v in &self.reset {
            self.home.insert(v, BigAddress::Reset);
        }
        let coloring = color_bucket(&mut self.core, &mut self.palettes, self.colorer, BigAddress::Reset, &self.reset)?;
        for (v, c) in coloring {
            self.core.assign(v, c);
        }
        self.epoch += 1;
        self.core.metrics.s_history.push(self.s);
        Ok(())
    }

    fn detach(&mut self, v: VertexId) {
        match self.home.remove(&v) {
            Some(BigAddress::Reset) => {
                self.reset.remove(&v);
            }
            Some(BigAddress::Bucket(i)) => {
                self.buckets[i as usize].remove(&v);
            }
            None => {}
        }
    }

    fn recolor(&mut self, i: usize) -> Result<(), EngineError> {
        let addr = BigAddress::Bucket(i as u32);
        let coloring = color_bucket(&mut self.core, &mut self.palettes, self.colorer, addr, &self.buckets[i])?;
        for (v, c) in coloring {
            self.core.assign(v, c);
        }
        Ok(())
    }

    fn insert(&mut self, v: VertexId) -> Result<(), EngineError> {
        self.buckets[0].insert(v);
        self.home.insert(v, BigAddress::Bucket(0));
        self.recolor(0)?;
        let mut i = 0usize;
        while self.buckets[i].len() as u64 > high_point(self.s, i as u32) {
            if i + 1 == self.d as usize {
                self.core.metrics.resets += 1;
                return self.rebuild_into_reset();
            }
            let moved = std::mem::take(&mut self.buckets[i]);
            for &x in &moved {
                self.home.insert(x, BigAddress::Bucket(i as u32 + 1));
            }
            self.buckets[i + 1].extend(moved);
            self.recolor(i + 1)?;
            i += 1;
        }
        Ok(())
    }

    fn pick_endpoint(&self, u: VertexId, v: VertexId) -> VertexId {
        let rank = |x: VertexId| (self.home[&x], x);
        if rank(u) <= rank(v) {
            u
        } else {
            v
        }
    }
}

impl Recolorer for BigBuckets {
    fn name(&self) -> String {
        "big".into()
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
            return bad("home map out of sync with the graph".into());
        }
        let mut seen = self.reset.len();
        for (i, b) in self.buckets.iter().enumerate() {
            let hp = high_point(self.s, i as u32);
            if b.len() as u64 > hp {
                return bad(format!("bucket {i} holds {} > high point {hp}", b.len()));
            }
            let addr = BigAddress::Bucket(i as u32);
            for &v in b {
                if self.home.get(&v) != Some(&addr) {
                    return bad(format!("vertex {v} misfiled in bucket {i}"));
                }
                if !self.palettes.contains(addr, self.core.color(v).expect("colored")) {
                    return bad(format!("vertex {v} colored outside bucket {i}'s palette"));
                }
            }
            seen += b.len();
        }
        for &v in &self.reset {
            if self.home.get(&v) != Some(&BigAddress::Reset)
                || !self.palettes.contains(BigAddress::Reset, self.core.color(v).expect("colored"))
            {
                return bad(format!("vertex {v} misfiled in reset bucket"));
            }
        }
        if seen != self.home.len() {
            return bad("buckets do not partition the vertices".into());
        }
        Ok(())
    }

    fn color_budget(&self) -> Option<u64> {
        Some((self.d as u64 + 1) * self.core.metrics.bucket_colors_max)
    }

    fn s(&self) -> Option<u64> {
        Some(self.s)
    }
}
