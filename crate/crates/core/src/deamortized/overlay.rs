//! Real and simulated placements side by side. A vertex has a shadow iff the two differ.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeBounds;

use rustc_hash::FxHashMap;

use crate::graph::VertexId;
use crate::ledger::Color;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement<A> {
    pub addr: A,
    pub color: Color,
}

#[derive(Clone, Debug)]
pub struct ShadowOverlay<A: Ord + Copy> {
    real: FxHashMap<VertexId, Placement<A>>,
    sim: FxHashMap<VertexId, Placement<A>>,
    real_occ: BTreeMap<A, BTreeSet<VertexId>>,
    sim_occ: BTreeMap<A, BTreeSet<VertexId>>,
    shadows: usize,
}

impl<A: Ord + Copy> Default for ShadowOverlay<A> {
    fn default() -> Self {
        ShadowOverlay {
            real: FxHashMap::default(),
            sim: FxHashMap::default(),
            real_occ: BTreeMap::new(),
            sim_occ: BTreeMap::new(),
            shadows: 0,
        }
    }
}

fn unfile<A: Ord + Copy>(occ: &mut BTreeMap<A, BTreeSet<VertexId>>, a: A, v: VertexId) {
    if let Some(set) = occ.get_mut(&a) {
        set.remove(&v);
        if set.is_empty() {
            occ.remove(&a);
        }
    }
}

impl<A: Ord + Copy> ShadowOverlay<A> {
    pub fn real(&self, v: VertexId) -> Option<Placement<A>> {
        self.real.get(&v).copied()
    }

    pub fn sim(&self, v: VertexId) -> Option<Placement<A>> {
        self.sim.get(&v).copied()
    }

    pub fn has_shadow(&self, v: VertexId) -> bool {
        self.sim.contains_key(&v) && self.real.get(&v) != self.sim.get(&v)
    }

    /// The simulated placement, when it differs from the real one.
    pub fn shadow(&self, v: VertexId) -> Option<Placement<A>> {
        if self.has_shadow(v) {
            self.sim(v)
        } else {
            None
        }
    }

    pub fn shadow_count(&self) -> usize {
        self.shadows
    }

    fn shadow_delta<R>(&mut self, v: VertexId, f: impl FnOnce(&mut Self) -> R) -> R {
        let before = self.has_shadow(v);
        let r = f(self);
        let after = self.has_shadow(v);
        match (before, after) {
            (false, true) => self.shadows += 1,
            (true, false) => self.shadows -= 1,
            _ => {}
        }
        r
    }

    /// Places `v` really and in the simulation at once, with no shadow.
    pub fn place(&mut self, v: VertexId, p: Placement<A>) {
        self.remove(v);
        self.real.insert(v, p);
        self.real_occ.entry(p.addr).or_default().insert(v);
        self.sim.insert(v, p);
        self.sim_occ.entry(p.addr).or_default().insert(v);
    }

    /// Sets the simulated placement of `v`.
    pub fn set_sim(&mut self, v: VertexId, p: Placement<A>) {
        self.shadow_delta(v, |o| {
            if let Some(old) = o.sim.insert(v, p) {
                unfile(&mut o.sim_occ, old.addr, v);
            }
            o.sim_occ.entry(p.addr).or_default().insert(v);
        });
    }

    /// Drops the simulated placement of `v`, keeping its real one.
    pub fn clear_sim(&mut self, v: VertexId) -> Option<Placement<A>> {
        self.shadow_delta(v, |o| {
            let old = o.sim.remove(&v);
            if let Some(p) = old {
                unfile(&mut o.sim_occ, p.addr, v);
            }
            old
        })
    }

    /// Moves the real vertex onto its shadow. Returns the new real placement if it moved.
    pub fn realize(&mut self, v: VertexId) -> Option<Placement<A>> {
        let target = self.shadow(v)?;
        if let Some(old) = self.real.insert(v, target) {
            unfile(&mut self.real_occ, old.addr, v);
        }
        self.real_occ.entry(target.addr).or_default().insert(v);
        self.shadows -= 1;
        Some(target)
    }

    pub fn remove(&mut self, v: VertexId) {
        if self.has_shadow(v) {
            self.shadows -= 1;
        }
        if let Some(p) = self.real.remove(&v) {
            unfile(&mut self.real_occ, p.addr, v);
        }
        if let Some(p) = self.sim.remove(&v) {
            unfile(&mut self.sim_occ, p.addr, v);
        }
    }

    pub fn reals_in(&self, a: A) -> Option<&BTreeSet<VertexId>> {
        self.real_occ.get(&a)
    }

    pub fn sims_in(&self, a: A) -> Option<&BTreeSet<VertexId>> {
        self.sim_occ.get(&a)
    }

    pub fn real_count(&self, a: A) -> usize {
        self.real_occ.get(&a).map_or(0, BTreeSet::len)
    }

    pub fn sim_count(&self, a: A) -> usize {
        self.sim_occ.get(&a).map_or(0, BTreeSet::len)
    }

    pub fn sim_placements(&self) -> impl Iterator<Item = (VertexId, Placement<A>)> + '_ {
        self.sim.iter().map(|(&v, &p)| (v, p))
    }

    pub fn real_placements(&self) -> impl Iterator<Item = (VertexId, Placement<A>)> + '_ {
        self.real.iter().map(|(&v, &p)| (v, p))
    }

    /// Real occupancy of the nonempty buckets whose address falls in `range`.
    pub fn real_range<R: RangeBounds<A>>(&self, range: R) -> impl Iterator<Item = (&A, &BTreeSet<VertexId>)> {
        self.real_occ.range(range)
    }

    pub fn sim_range<R: RangeBounds<A>>(&self, range: R) -> impl Iterator<Item = (&A, &BTreeSet<VertexId>)> {
        self.sim_occ.range(range)
    }

    pub fn real_buckets(&self) -> impl Iterator<Item = (&A, &BTreeSet<VertexId>)> {
        self.real_occ.iter()
    }

    pub fn sim_buckets(&self) -> impl Iterator<Item = (&A, &BTreeSet<VertexId>)> {
        self.sim_occ.iter()
    }

    /// Number of vertices tracked by the simulation.
    pub fn len(&self) -> usize {
        self.sim.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sim.is_empty()
    }
}
