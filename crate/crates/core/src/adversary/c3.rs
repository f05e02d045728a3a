//! Three colors: 1-trees merged into three 2-trees, then matching links between equal-colored roots.

use std::collections::{BTreeSet, VecDeque};

use super::arena::{Adversary, AdversaryError, ChargeLedger, CycleRecord, LinkRecord};
use crate::engine::{ceil_root, pow_sat};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::{ColorChange, ColoredGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Start,
    Assign,
    Links,
}

#[derive(Clone, Debug)]
pub struct C3Adversary {
    n: u64,
    t: u64,
    q: u64,
    leaf_counts: Vec<[u64; 4]>,
    leaf_recolors: Vec<u64>,
    assigned: Vec<u64>,
    two_roots: [VertexId; 3],
    inter: BTreeSet<(VertexId, VertexId)>,
    links: BTreeSet<(VertexId, VertexId)>,
    pending_link: Option<(VertexId, VertexId)>,
    queue: VecDeque<UpdateOp>,
    phase: Phase,
    cycle: Option<CycleRecord>,
    ledger: ChargeLedger,
    max_cycles: Option<usize>,
    updates: u64,
}

/// `t = n^{1/3}` one-trees, each a root with `t^2 - 1` leaves. Tree `k` has root `k * t^2`.
pub fn build_c3(n: u64) -> Result<(DynamicGraph, C3Adversary), AdversaryError> {
    let t = ceil_root(n, 3);
    if pow_sat(t, 3) != n || t < 27 || !t.is_multiple_of(9) {
        return Err(AdversaryError::Precondition(format!(
            "n = {n} must be a cube whose root is a multiple of 9 and at least 27"
        )));
    }
    let q = t * t;
    let mut edges = Vec::with_capacity(n as usize);
    for k in 0..t {
        let root = k * q;
        edges.extend((1..q).map(|j| (root + j, root)));
    }
    let g = DynamicGraph::from_edges(0..n, &edges);
    let adv = C3Adversary {
        n,
        t,
        q,
        leaf_counts: vec![[0; 4]; t as usize],
        leaf_recolors: vec![0; t as usize],
        assigned: vec![0; t as usize],
        two_roots: [VertexId(0); 3],
        inter: BTreeSet::new(),
        links: BTreeSet::new(),
        pending_link: None,
        queue: VecDeque::new(),
        phase: Phase::Assign,
        cycle: None,
        ledger: ChargeLedger::default(),
        max_cycles: None,
        updates: 0,
    };
    Ok((g, adv))
}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

impl C3Adversary {
    pub fn t(&self) -> u64 {
        self.t
    }

    /// Stop after this many completed or invalidated cycles.
    pub fn with_max_cycles(mut self, k: usize) -> Self {
        self.max_cycles = Some(k);
        self
    }

    /// Leaves to recolor before a 1-tree loses its assigned color: `(t^2 - 1) / 2`.
    pub fn invalidation_floor(&self) -> u64 {
        (self.q - 1) / 2
    }

    /// Matching links per cycle: `t / 6`.
    pub fn links_per_cycle(&self) -> u64 {
        self.t / 6
    }

    /// Recolorings each matching link forces while no 1-tree is invalid: `t / 9`.
    pub fn link_floor(&self) -> u64 {
        self.t / 9
    }

    fn tree_of(&self, v: VertexId) -> Option<usize> {
        (v.0 < self.n && !v.0.is_multiple_of(self.q)).then(|| (v.0 / self.q) as usize)
    }

    fn root(&self, k: usize) -> VertexId {
        VertexId(k as u64 * self.q)
    }

    fn assign(&mut self, view: &ColoredGraph) -> Result<(), AdversaryError> {
        for k in 0..self.t as usize {
            let mut counts = [0u64; 4];
            for j in 1..self.q {
                let c = view.color(VertexId(k as u64 * self.q + j)).map_or(0, |c| c.0);
                counts[c.min(3) as usize] += 1;
            }
            self.leaf_counts[k] = counts;
            self.leaf_recolors[k] = 0;
            self.assigned[k] = (1..=3u64).max_by_key(|&c| (counts[c as usize], std::cmp::Reverse(c))).expect("colors");
        }
        let x = (1..=3u64)
            .max_by_key(|&c| (self.assigned.iter().filter(|&&a| a == c).count(), std::cmp::Reverse(c)))
            .expect("colors");
        let per = (self.t / 9) as usize;
        let members: Vec<usize> = (0..self.t as usize).filter(|&k| self.assigned[k] == x).take(3 * per).collect();
        if members.len() < 3 * per {
            return Err(AdversaryError::Audit(format!("only {} one-trees share the majority color", members.len())));
        }
        for g in 0..3 {
            let group = &members[g * per..(g + 1) * per];
            let r = self.root(group[0]);
            self.two_roots[g] = r;
            for &k in &group[1..] {
                let u = self.root(k);
                self.queue.push_back(UpdateOp::InsertEdge(u, r));
                self.inter.insert(key(u, r));
            }
        }
        Ok(())
    }

    fn end_cycle(&mut self, complete: bool) {
        if let Some(mut c) = self.cycle.take() {
            c.complete = complete;
            self.ledger.cycles.push(c);
        }
        self.queue.clear();
        self.pending_link = None;
        self.phase = Phase::Start;
    }

    fn linked(&self, a: VertexId, b: VertexId) -> bool {
        self.links.contains(&key(a, b))
    }
}

impl Adversary for C3Adversary {
    fn name(&self) -> String {
        format!("c3(n={})", self.n)
    }

    fn c(&self) -> u64 {
        3
    }

    fn done(&self) -> bool {
        self.max_cycles.is_some_and(|k| self.ledger.cycles.len() >= k)
    }

    fn next_op(&mut self, view: &ColoredGraph) -> Result<Option<UpdateOp>, AdversaryError> {
        loop {
            if let Some(op) = self.queue.pop_front() {
                if let UpdateOp::DeleteEdge(u, v) = &op {
                    if self.tree_of(*u).is_some() || self.tree_of(*v).is_some() {
                        return Err(AdversaryError::Audit(format!("cut of 1-tree edge {u}-{v}")));
                    }
                }
                return Ok(Some(op));
            }
            match self.phase {
                Phase::Start => {
                    self.cycle = Some(CycleRecord::default());
                    for (u, v) in std::mem::take(&mut self.inter) {
                        self.queue.push_back(UpdateOp::DeleteEdge(u, v));
                    }
                    self.links.clear();
                    self.phase = Phase::Assign;
                }
                Phase::Assign => {
                    if self.cycle.is_none() {
                        self.cycle = Some(CycleRecord::default());
                    }
                    self.assign(view)?;
                    self.phase = Phase::Links;
                }
                Phase::Links => {
                    let r = self.two_roots;
                    let (a, b) = [(0, 1), (0, 2), (1, 2)]
                        .into_iter()
                        .map(|(i, j)| (r[i], r[j]))
                        .find(|&(a, b)| view.color(a) == view.color(b))
                        .ok_or_else(|| AdversaryError::Audit("2-tree roots pairwise distinct".into()))?;
                    if self.linked(a, b) {
                        return Err(AdversaryError::Audit(format!("linked roots {a}, {b} share a color")));
                    }
                    let third = r.into_iter().find(|&x| x != a && x != b).expect("three roots");
                    if self.linked(a, third) && self.linked(third, b) {
                        self.queue.push_back(UpdateOp::DeleteEdge(a, third));
                    }
                    self.queue.push_back(UpdateOp::InsertEdge(a, b));
                    self.pending_link = Some(key(a, b));
                }
            }
        }
    }

    fn observe(
        &mut self,
        op: &UpdateOp,
        _view: &ColoredGraph,
        changes: &[ColorChange],
        forced: u64,
    ) -> Result<(), AdversaryError> {
        for ch in changes {
            if let (Some(k), Some(old), Some(new)) = (self.tree_of(ch.vertex), ch.old, ch.new) {
                if old != new {
                    self.leaf_counts[k][old.0.min(3) as usize] -= 1;
                    self.leaf_counts[k][new.0.min(3) as usize] += 1;
                    self.leaf_recolors[k] += 1;
                }
            }
        }
        self.updates += 1;
        let (t, updates) = (self.t, self.updates);
        let Some(cycle) = self.cycle.as_mut() else {
            return Ok(());
        };
        cycle.updates += 1;
        cycle.recolorings += forced;
        match op {
            UpdateOp::DeleteEdge(u, v) => {
                self.inter.remove(&key(*u, *v));
                if self.links.remove(&key(*u, *v)) {
                    cycle.cuts += 1;
                }
            }
            UpdateOp::InsertEdge(u, v) if self.pending_link == Some(key(*u, *v)) => {
                cycle.link_costs.push(forced);
                self.links.insert(key(*u, *v));
                self.inter.insert(key(*u, *v));
                self.pending_link = None;
                self.ledger.links.push(LinkRecord { update: updates, forced });
            }
            _ => {}
        }
        if cycle.updates > t {
            return Err(AdversaryError::Audit(format!("cycle exceeded {t} updates")));
        }
        if cycle.link_costs.len() as u64 >= self.links_per_cycle() {
            self.end_cycle(true);
            return Ok(());
        }
        if self.phase == Phase::Links {
            let invalid = (0..self.t as usize).find(|&k| self.leaf_counts[k][self.assigned[k] as usize] == 0);
            if let Some(k) = invalid {
                if let Some(c) = self.cycle.as_mut() {
                    c.invalidation_cost = Some(self.leaf_recolors[k]);
                }
                self.end_cycle(false);
            }
        }
        Ok(())
    }

    fn ledger(&self) -> &ChargeLedger {
        &self.ledger
    }
}
