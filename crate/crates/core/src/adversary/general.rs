//! Any number of colors: recursive k-trees, k-configurations, reset phases and a final root link.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::arena::{Adversary, AdversaryError, ChargeLedger, LinkRecord, ResetRecord};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::{ColorChange, ColoredGraph};

const NONE: u32 = u32::MAX;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `floor(n^(p/q))` in exact integer arithmetic, for `p <= q`.
pub fn floor_pow_ratio(n: u64, p: u64, q: u64) -> Option<u64> {
    let g = gcd(p, q).max(1);
    let (p, q) = (p / g, q / g);
    let target = (n as u128).checked_pow(p as u32)?;
    let fits = |x: u64| (x as u128).checked_pow(q as u32).is_some_and(|v| v <= target);
    let (mut lo, mut hi) = (0u64, n.max(1));
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Some(lo)
}

/// Tree sizes and configuration targets. Index `k` runs over tree levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneralParams {
    pub c: u64,
    pub n: u64,
    pub alpha: u64,
    /// `n_k[k] = floor(n^(2(c-k)/(c(c-1))))` for `k` in `0..=c`.
    pub n_k: Vec<u64>,
    /// `t_k[k]` for `k` in `0..c`; nested floors of `T_{k-1} / (2c * b_k)`.
    pub t_k: Vec<u64>,
}

impl GeneralParams {
    /// Uses the smallest `alpha` that leaves at least `2(c+1)` trees at level `c-1`.
    pub fn new(c: u64, n: u64) -> Result<Self, AdversaryError> {
        let alpha = Self::min_alpha(c, n)?;
        Self::with_alpha(c, n, alpha)
    }

    fn sizes(c: u64, n: u64) -> Result<Vec<u64>, AdversaryError> {
        if c < 2 {
            return Err(AdversaryError::Precondition(format!("c = {c} must be at least 2")));
        }
        let q = c * (c - 1);
        (0..=c)
            .map(|k| {
                floor_pow_ratio(n, 2 * (c - k), q)
                    .ok_or_else(|| AdversaryError::Precondition(format!("n = {n} too large for c = {c}")))
            })
            .collect()
    }

    fn product(c: u64, n_k: &[u64]) -> Result<u64, AdversaryError> {
        (1..c).try_fold(1u64, |acc, k| {
            acc.checked_mul(4 * c * n_k[k as usize])
                .ok_or_else(|| AdversaryError::Precondition("tree counts overflow".into()))
        })
    }

    pub fn min_alpha(c: u64, n: u64) -> Result<u64, AdversaryError> {
        let n_k = Self::sizes(c, n)?;
        let q = Self::product(c, &n_k)?;
        let need =
            q.checked_mul(2 * (c + 1)).ok_or_else(|| AdversaryError::Precondition("tree counts overflow".into()))?;
        Ok(need.div_ceil(n.max(1)).max(1))
    }

    pub fn with_alpha(c: u64, n: u64, alpha: u64) -> Result<Self, AdversaryError> {
        let n_k = Self::sizes(c, n)?;
        for k in 1..c {
            if 2 * n_k[k as usize] < c {
                return Err(AdversaryError::Precondition(format!(
                    "n = {n}: level {k} merges {} trees, too few for {c} colors",
                    2 * n_k[k as usize]
                )));
            }
        }
        let t0 = alpha.checked_mul(n).ok_or_else(|| AdversaryError::Precondition("alpha * n overflows".into()))?;
        let mut t_k = vec![t0];
        for k in 1..c {
            let prev = t_k[k as usize - 1];
            t_k.push(prev / (4 * c * n_k[k as usize]));
        }
        let top = t_k[c as usize - 1];
        if top < 2 * (c + 1) {
            return Err(AdversaryError::Precondition(format!(
                "alpha = {alpha} leaves {top} trees at level {}, need {}",
                c - 1,
                2 * (c + 1)
            )));
        }
        Ok(Self { c, n, alpha, n_k, t_k })
    }

    /// Smallest `n >= 2` for which every level can assign a color to at least one child.
    /// That is `m^(c(c-1)/2)` with `m = ceil(c/2)`, since level `c-1` has the fewest children.
    pub fn smallest_feasible_n(c: u64) -> Result<u64, AdversaryError> {
        if c < 2 {
            return Err(AdversaryError::Precondition(format!("c = {c} must be at least 2")));
        }
        let m = c.div_ceil(2);
        let n = m
            .checked_pow((c * (c - 1) / 2) as u32)
            .ok_or_else(|| AdversaryError::Precondition(format!("no representable n for c = {c}")))?;
        Ok(n.max(2))
    }

    /// Trees merged into one tree of level `k`.
    pub fn b(&self, k: usize) -> u64 {
        2 * self.n_k[k]
    }

    pub fn t(&self, k: usize) -> u64 {
        self.t_k[k]
    }

    pub fn vertices(&self) -> u64 {
        self.t_k[0]
    }

    /// `alpha / (4c)^k * n^(1 - sum_{i=1..k} 2(c-i)/(c(c-1)))`.
    pub fn closed_form_t(&self, k: usize) -> f64 {
        let c = self.c as f64;
        let q = c * (c - 1.0);
        let expo = 1.0 - (1..=k).map(|i| 2.0 * (c - i as f64) / q).sum::<f64>();
        self.alpha as f64 / (4.0 * c).powi(k as i32) * (self.n as f64).powf(expo)
    }

    /// Children of the assigned color a level-`k` tree is guaranteed: `ceil((b_k - 1) / c)`.
    pub fn observation_bound(&self, k: usize) -> u64 {
        (self.b(k) - 1).div_ceil(self.c)
    }

    /// `ceil(2 N_k / c)`; equals `observation_bound` unless `2 N_k = 1 (mod c)`.
    pub fn rounded_observation_bound(&self, k: usize) -> u64 {
        self.b(k).div_ceil(self.c)
    }

    /// `n^(2/(c(c-1)))`, the per-wasted-insertion charge scale.
    pub fn charge_scale(&self) -> u64 {
        self.n_k[self.c as usize - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KTree {
    pub level: usize,
    pub root: VertexId,
    /// Same-root tree one level down; `None` at level 1.
    pub core: Option<usize>,
    /// Roots of the non-core subtrees hanging from `root`.
    pub children: Vec<VertexId>,
    /// Tree ids of those subtrees; empty at level 1.
    pub child_trees: Vec<usize>,
    pub counts: Vec<u64>,
    pub assigned: Option<u64>,
    pub assigned_count: u64,
    /// Child recolorings since the last color assignment.
    pub counter: u64,
    /// Set when the last child of the assigned color is recolored; cleared only by reassignment.
    pub violated: bool,
    pub valid: bool,
    pub alive: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Plan(usize),
    Wait(usize),
    Top,
    Drain,
}

/// Counts of audited events.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GeneralStats {
    pub violations: u64,
    pub observation_checks: u64,
    pub blocked_checks: u64,
    pub audits: u64,
    pub top_links: u64,
    pub observed: u64,
}

/// Insertions spent building level `level` trees from level `level - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BuildRecord {
    pub level: usize,
    pub insertions: u64,
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct GeneralAdversary {
    params: GeneralParams,
    trees: Vec<KTree>,
    parent_of: Vec<u32>,
    chain: Vec<Vec<u32>>,
    configs: Vec<Vec<usize>>,
    valid_count: Vec<u64>,
    edges_by_level: Vec<Vec<(VertexId, VertexId)>>,
    chosen: Vec<Option<u64>>,
    assigned_upto: usize,
    phase: Phase,
    queue: VecDeque<(UpdateOp, Option<usize>)>,
    pending_link: Option<(VertexId, VertexId)>,
    builds: Vec<BuildRecord>,
    updates: u64,
    insertions: u64,
    stats: GeneralStats,
    ledger: ChargeLedger,
    max_resets: Option<usize>,
    check_every_event: bool,
}

/// `alpha * n` isolated vertices and the generator that builds on them.
pub fn build_general(c: u64, n: u64, alpha: u64) -> Result<(DynamicGraph, GeneralAdversary), AdversaryError> {
    let params = GeneralParams::with_alpha(c, n, alpha)?;
    let v = params.vertices();
    if v >= NONE as u64 {
        return Err(AdversaryError::Precondition(format!("{v} vertices is too many")));
    }
    let g = DynamicGraph::from_edges(0..v, &[]);
    let levels = c as usize + 1;
    let adv = GeneralAdversary {
        trees: Vec::new(),
        parent_of: vec![NONE; v as usize],
        chain: vec![Vec::new(); v as usize],
        configs: vec![Vec::new(); levels],
        valid_count: vec![0; levels],
        edges_by_level: vec![Vec::new(); levels],
        chosen: vec![None; levels],
        assigned_upto: 0,
        phase: Phase::Plan(1),
        queue: VecDeque::new(),
        pending_link: None,
        builds: Vec::new(),
        updates: 0,
        insertions: 0,
        stats: GeneralStats::default(),
        ledger: ChargeLedger::default(),
        max_resets: None,
        check_every_event: true,
        params,
    };
    Ok((g, adv))
}

impl GeneralAdversary {
    pub fn params(&self) -> &GeneralParams {
        &self.params
    }

    pub fn stats(&self) -> &GeneralStats {
        &self.stats
    }

    pub fn builds(&self) -> &[BuildRecord] {
        &self.builds
    }

    pub fn tree(&self, id: usize) -> &KTree {
        &self.trees[id]
    }

    pub fn config(&self, k: usize) -> &[usize] {
        &self.configs[k]
    }

    pub fn valid_count(&self, k: usize) -> u64 {
        self.valid_count[k]
    }

    pub fn assigned_upto(&self) -> usize {
        self.assigned_upto
    }

    /// Stop once this many resets have completed.
    pub fn with_max_resets(mut self, k: usize) -> Self {
        self.max_resets = Some(k);
        self
    }

    /// Skip the full structural audit at phase transitions.
    pub fn without_audits(mut self) -> Self {
        self.check_every_event = false;
        self
    }

    fn top(&self) -> usize {
        self.params.c as usize - 1
    }

    fn next_phase(&self, k: usize) -> Phase {
        if k < self.top() {
            Phase::Plan(k + 1)
        } else {
            Phase::Top
        }
    }

    fn core_chain(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.trees[id].core, move |&t| self.trees[t].core)
    }

    fn compute_valid(&self, id: usize) -> bool {
        let t = &self.trees[id];
        t.assigned.is_some() && !t.violated && self.core_chain(id).all(|x| !self.trees[x].violated)
    }

    fn first_invalid(&self) -> Option<usize> {
        (1..=self.assigned_upto).find(|&j| 2 * self.valid_count[j] < self.params.t(j))
    }

    fn reassign(&mut self, id: usize, view: &ColoredGraph) -> Result<(), AdversaryError> {
        let c = self.params.c as usize;
        let mut counts = vec![0u64; c + 1];
        for &ch in &self.trees[id].children {
            let col = view.color(ch).map_or(0, |x| x.0 as usize);
            counts[col.min(c)] += 1;
        }
        let best = (1..=c).max_by_key(|&x| (counts[x], std::cmp::Reverse(x))).expect("c >= 2");
        let level = self.trees[id].level;
        if counts[best] < self.params.observation_bound(level) {
            return Err(AdversaryError::Audit(format!(
                "tree {id} assigned {best} with only {} children",
                counts[best]
            )));
        }
        let t = &mut self.trees[id];
        t.assigned_count = counts[best];
        t.assigned = Some(best as u64);
        t.counts = counts;
        t.counter = 0;
        t.violated = false;
        Ok(())
    }

    fn set_valid(&mut self, id: usize, valid: bool) {
        let t = &mut self.trees[id];
        if t.valid != valid {
            t.valid = valid;
            if valid {
                self.valid_count[t.level] += 1;
            } else {
                self.valid_count[t.level] -= 1;
            }
        }
    }

    fn plan(&mut self, k: usize, view: &ColoredGraph) -> Result<(), AdversaryError> {
        let b = self.params.b(k) as usize;
        let need = self.params.t(k) as usize * b;
        // Candidates: (tree id or vertex, root, color).
        let candidates: Vec<(Option<usize>, VertexId, u64)> = if k == 1 {
            (0..self.params.vertices())
                .map(|v| {
                    let v = VertexId(v);
                    (None, v, view.color(v).map_or(0, |c| c.0))
                })
                .collect()
        } else {
            self.configs[k - 1]
                .iter()
                .filter(|&&id| self.trees[id].valid)
                .map(|&id| (Some(id), self.trees[id].root, self.trees[id].assigned.unwrap_or(0)))
                .collect()
        };
        let mut by_color: BTreeMap<u64, usize> = BTreeMap::new();
        for &(_, _, col) in &candidates {
            *by_color.entry(col).or_default() += 1;
        }
        let (&color, &have) = by_color
            .iter()
            .max_by_key(|&(&col, &cnt)| (cnt, std::cmp::Reverse(col)))
            .ok_or_else(|| AdversaryError::ValidityExhausted(format!("no valid trees at level {}", k - 1)))?;
        if have < need {
            return Err(AdversaryError::ValidityExhausted(format!(
                "level {k} needs {need} trees of one color, best color {color} has {have}"
            )));
        }
        self.chosen[k - 1] = Some(color);
        let picked: Vec<_> = candidates.into_iter().filter(|x| x.2 == color).take(need).collect();
        let c = self.params.c as usize;
        for group in picked.chunks(b) {
            let id = self.trees.len();
            let (core, root, _) = group[0];
            let mut tree = KTree {
                level: k,
                root,
                core,
                children: Vec::with_capacity(b - 1),
                child_trees: Vec::new(),
                counts: vec![0; c + 1],
                assigned: None,
                assigned_count: 0,
                counter: 0,
                violated: false,
                valid: false,
                alive: true,
            };
            for &(sub, r, _) in &group[1..] {
                tree.children.push(r);
                if let Some(s) = sub {
                    tree.child_trees.push(s);
                }
                self.parent_of[r.0 as usize] = id as u32;
                self.queue.push_back((UpdateOp::InsertEdge(r, root), Some(k)));
            }
            let ch = &mut self.chain[root.0 as usize];
            if ch.len() != k - 1 {
                return Err(AdversaryError::Audit(format!("root {root} has {} levels, expected {}", ch.len(), k - 1)));
            }
            ch.push(id as u32);
            self.trees.push(tree);
            self.configs[k].push(id);
        }
        self.builds.push(BuildRecord { level: k, insertions: 0, complete: false });
        Ok(())
    }

    fn assign_level(&mut self, k: usize, view: &ColoredGraph) -> Result<(), AdversaryError> {
        for i in 0..self.configs[k].len() {
            let id = self.configs[k][i];
            self.reassign(id, view)?;
            let v = self.compute_valid(id);
            self.set_valid(id, v);
        }
        if let Some(b) = self.builds.last_mut() {
            b.complete = true;
        }
        self.assigned_upto = k;
        Ok(())
    }

    fn remove_levels(&mut self, from: usize) {
        for level in (from..self.configs.len()).rev() {
            for id in std::mem::take(&mut self.configs[level]) {
                let t = &mut self.trees[id];
                t.alive = false;
                t.valid = false;
                let root = t.root;
                for ch in std::mem::take(&mut t.children) {
                    if self.parent_of[ch.0 as usize] == id as u32 {
                        self.parent_of[ch.0 as usize] = NONE;
                    }
                }
                let chain = &mut self.chain[root.0 as usize];
                if chain.last() == Some(&(id as u32)) {
                    chain.pop();
                }
            }
            self.valid_count[level] = 0;
        }
    }

    fn find_violated(&self, id: usize) -> Option<usize> {
        if self.trees[id].violated {
            return Some(id);
        }
        let t = &self.trees[id];
        t.core.into_iter().chain(t.child_trees.iter().copied()).find_map(|x| self.find_violated(x))
    }

    fn subtrees_valid(&self, id: usize) -> bool {
        let t = &self.trees[id];
        t.core.into_iter().chain(t.child_trees.iter().copied()).all(|x| self.compute_valid(x))
    }

    fn reset(&mut self, j: usize, view: &ColoredGraph) -> Result<(), AdversaryError> {
        let ids = self.configs[j].clone();
        let (mut y0, mut y1, mut y2) = (Vec::new(), Vec::new(), Vec::new());
        for &id in &ids {
            if self.trees[id].valid {
                y0.push(id);
            } else if self.trees[id].violated && self.subtrees_valid(id) {
                y1.push(id);
            } else {
                y2.push(id);
            }
        }
        let mut charged = 0u64;
        let case = if y1.len() > y2.len() {
            for &id in &y1 {
                let t = &self.trees[id];
                if t.counter < t.assigned_count {
                    return Err(AdversaryError::Audit(format!("tree {id} violated after {} recolorings", t.counter)));
                }
                charged += t.counter;
                self.reassign(id, view)?;
                let v = self.compute_valid(id);
                self.set_valid(id, v);
            }
            self.remove_levels(j + 1);
            1
        } else {
            for &id in &y2 {
                let t = &self.trees[id];
                let low = t
                    .core
                    .into_iter()
                    .chain(t.child_trees.iter().copied())
                    .find_map(|x| self.find_violated(x))
                    .ok_or_else(|| {
                    AdversaryError::Audit(format!("tree {id} invalid without a violated subtree"))
                })?;
                charged += self.trees[low].counter;
                self.trees[low].counter = 0;
            }
            self.remove_levels(j);
            2
        };
        let from = if case == 1 { j + 1 } else { j };
        let mut h = 0u64;
        self.queue.clear();
        self.pending_link = None;
        for level in from..self.edges_by_level.len() {
            for (u, v) in std::mem::take(&mut self.edges_by_level[level]) {
                self.queue.push_back((UpdateOp::DeleteEdge(u, v), None));
                h += 1;
            }
        }
        if let Some(b) = self.builds.last() {
            if !b.complete && b.level >= from {
                self.builds.pop();
            }
        }
        self.ledger.wasted_insertions += h;
        self.ledger.charged_recolorings += charged;
        self.ledger.resets.push(ResetRecord {
            update: self.updates,
            level: j,
            case,
            h,
            charged,
            y0: y0.len() as u64,
            y1: y1.len() as u64,
            y2: y2.len() as u64,
        });
        self.assigned_upto = if case == 1 { j } else { j - 1 };
        self.phase = Phase::Drain;
        if self.ledger.charged_recolorings > self.stats.observed {
            return Err(AdversaryError::Audit(format!(
                "charged {} exceeds observed {}",
                self.ledger.charged_recolorings, self.stats.observed
            )));
        }
        Ok(())
    }

    fn pick_link(&mut self, view: &ColoredGraph) -> Result<(VertexId, VertexId), AdversaryError> {
        let top = self.top();
        let mut by_color: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for &id in &self.configs[top] {
            if self.trees[id].valid {
                by_color.entry(self.trees[id].assigned.unwrap_or(0)).or_default().push(id);
            }
        }
        let pair = by_color
            .values()
            .find(|v| v.len() >= 2)
            .map(|v| (v[0], v[1]))
            .ok_or_else(|| AdversaryError::ValidityExhausted("no two valid top trees share a color".into()))?;
        let (a, b) = (self.trees[pair.0].root, self.trees[pair.1].root);
        self.stats.blocked_checks += 1;
        if view.color(a) != view.color(b) {
            return Err(AdversaryError::Audit(format!(
                "blocked colors: roots {a} and {b} of equally assigned trees have colors {:?} and {:?}",
                view.color(a),
                view.color(b)
            )));
        }
        if view.graph.connected(a, b) {
            return Err(AdversaryError::Audit(format!("valid top trees at {a} and {b} share a component")));
        }
        Ok((a, b))
    }

    /// Full structural check of every live tree against the current coloring.
    pub fn audit(&self, view: &ColoredGraph) -> Result<(), AdversaryError> {
        let fail = |s: String| Err(AdversaryError::Audit(s));
        let p = &self.params;
        for k in 1..=self.assigned_upto {
            if self.configs[k].len() as u64 != p.t(k) {
                return fail(format!("level {k} holds {} trees, expected {}", self.configs[k].len(), p.t(k)));
            }
            let mut valid = 0;
            for &id in &self.configs[k] {
                let t = &self.trees[id];
                if !t.alive || t.level != k {
                    return fail(format!("tree {id} dead or misfiled"));
                }
                if t.children.len() as u64 != p.b(k) - 1 {
                    return fail(format!("tree {id} has {} children", t.children.len()));
                }
                match t.core {
                    None if k == 1 => {}
                    Some(core) if k > 1 && self.trees[core].root == t.root && self.trees[core].level == k - 1 => {}
                    _ => return fail(format!("tree {id} has a bad core")),
                }
                if k > 1 && t.child_trees.len() != t.children.len() {
                    return fail(format!("tree {id} lost subtrees"));
                }
                for (i, &ch) in t.children.iter().enumerate() {
                    if self.parent_of[ch.0 as usize] != id as u32 || !view.graph.has_edge(ch, t.root) {
                        return fail(format!("tree {id} lost child {ch}"));
                    }
                    if k > 1 && self.trees[t.child_trees[i]].root != ch {
                        return fail(format!("tree {id} subtree {i} root mismatch"));
                    }
                }
                let mut counts = vec![0u64; p.c as usize + 1];
                for &ch in &t.children {
                    counts[view.color(ch).map_or(0, |x| x.0 as usize).min(p.c as usize)] += 1;
                }
                if counts != t.counts {
                    return fail(format!("tree {id} color histogram drifted"));
                }
                if t.valid != self.compute_valid(id) {
                    return fail(format!("tree {id} validity flag stale"));
                }
                if t.valid {
                    valid += 1;
                    let mut seen = vec![t.assigned];
                    for core in self.core_chain(id) {
                        let ct = &self.trees[core];
                        if ct.assigned != self.chosen[ct.level] {
                            return fail(format!("core {core} of tree {id} lacks color {:?}", self.chosen[ct.level]));
                        }
                        if seen.contains(&ct.assigned) {
                            return fail(format!("tree {id} repeats assigned color {:?}", ct.assigned));
                        }
                        seen.push(ct.assigned);
                    }
                }
            }
            if valid != self.valid_count[k] {
                return fail(format!("level {k} valid count {} != {valid}", self.valid_count[k]));
            }
        }
        if self.ledger.charged_recolorings > p.c * self.stats.observed {
            return fail("charged exceeds c times observed".into());
        }
        if self.ledger.wasted_insertions > self.insertions {
            return fail("more wasted insertions than insertions".into());
        }
        Ok(())
    }

    fn audit_now(&mut self, view: &ColoredGraph) -> Result<(), AdversaryError> {
        if self.check_every_event {
            self.stats.audits += 1;
            self.audit(view)?;
        }
        Ok(())
    }

    fn on_recolor(&mut self, v: VertexId, old: u64, new: u64) -> Result<(), AdversaryError> {
        let Some(&pid) = self.parent_of.get(v.0 as usize) else {
            return Ok(());
        };
        if pid == NONE {
            return Ok(());
        }
        let id = pid as usize;
        let c = self.params.c as usize;
        let t = &mut self.trees[id];
        let Some(assigned) = t.assigned else {
            return Ok(());
        };
        t.counts[(old as usize).min(c)] -= 1;
        t.counts[(new as usize).min(c)] += 1;
        t.counter += 1;
        if t.violated || t.counts[assigned as usize] > 0 {
            return Ok(());
        }
        t.violated = true;
        self.stats.violations += 1;
        self.stats.observation_checks += 1;
        if t.counter < t.assigned_count {
            return Err(AdversaryError::Audit(format!(
                "tree {id} violated after {} recolorings, below {}",
                t.counter, t.assigned_count
            )));
        }
        let (level, root) = (t.level, t.root);
        let above: Vec<usize> = self.chain[root.0 as usize][level - 1..].iter().map(|&x| x as usize).collect();
        for x in above {
            self.set_valid(x, false);
        }
        Ok(())
    }
}

impl Adversary for GeneralAdversary {
    fn name(&self) -> String {
        format!("general(c={},n={},alpha={})", self.params.c, self.params.n, self.params.alpha)
    }

    fn c(&self) -> u64 {
        self.params.c
    }

    fn done(&self) -> bool {
        self.max_resets
            .is_some_and(|k| self.ledger.resets.len() >= k && self.phase == Phase::Drain && self.queue.is_empty())
    }

    fn next_op(&mut self, view: &ColoredGraph) -> Result<Option<UpdateOp>, AdversaryError> {
        loop {
            if let Some((op, level)) = self.queue.pop_front() {
                if let (Some(l), UpdateOp::InsertEdge(u, v)) = (level, &op) {
                    self.edges_by_level[l].push((*u, *v));
                    if l < self.edges_by_level.len() - 1 {
                        if let Some(b) = self.builds.last_mut() {
                            b.insertions += 1;
                        }
                    }
                }
                return Ok(Some(op));
            }
            match self.phase {
                Phase::Drain => {
                    self.audit_now(view)?;
                    self.phase = self.next_phase(self.assigned_upto);
                }
                Phase::Plan(k) => {
                    if let Some(j) = self.first_invalid() {
                        self.reset(j, view)?;
                        continue;
                    }
                    self.plan(k, view)?;
                    self.phase = Phase::Wait(k);
                }
                Phase::Wait(k) => {
                    self.assign_level(k, view)?;
                    self.audit_now(view)?;
                    match self.first_invalid() {
                        Some(j) => self.reset(j, view)?,
                        None => self.phase = self.next_phase(k),
                    }
                }
                Phase::Top => {
                    if let Some(j) = self.first_invalid() {
                        self.reset(j, view)?;
                        continue;
                    }
                    let (a, b) = self.pick_link(view)?;
                    let top = self.params.c as usize;
                    self.queue.push_back((UpdateOp::InsertEdge(a, b), Some(top)));
                    self.pending_link = Some((a, b));
                }
            }
        }
    }

    fn observe(
        &mut self,
        op: &UpdateOp,
        view: &ColoredGraph,
        changes: &[ColorChange],
        forced: u64,
    ) -> Result<(), AdversaryError> {
        self.updates += 1;
        if op.is_insertion() {
            self.insertions += 1;
        }
        for ch in changes {
            if let (Some(old), Some(new)) = (ch.old, ch.new) {
                if old != new {
                    self.stats.observed += 1;
                    self.on_recolor(ch.vertex, old.0, new.0)?;
                }
            }
        }
        if let UpdateOp::InsertEdge(u, v) = op {
            if self.pending_link == Some((*u, *v)) {
                self.pending_link = None;
                self.stats.top_links += 1;
                self.ledger.links.push(LinkRecord { update: self.updates, forced });
            }
        }
        let live = matches!(self.phase, Phase::Wait(_) | Phase::Top);
        if live {
            if let Some(j) = self.first_invalid() {
                self.reset(j, view)?;
            }
        }
        Ok(())
    }

    fn ledger(&self) -> &ChargeLedger {
        &self.ledger
    }
}
