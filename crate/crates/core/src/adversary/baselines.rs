//! Concrete c-coloring algorithms for the arena. Colors are `1..=c`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, Recolorer};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::{Color, ColoredGraph};

/// Largest non-tree component the exact repair will search.
pub const BRANCH_AND_BOUND_LIMIT: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    /// Fewest recolorings that make the affected component proper.
    MinimalRepair,
    /// Flip the smaller side of a 2-colored forest.
    BfsFlip,
    /// Recolor outward from the conflict, one vertex at a time.
    GreedyRepair,
}

impl BaselineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::MinimalRepair => "minimal",
            BaselineKind::BfsFlip => "bfs-flip",
            BaselineKind::GreedyRepair => "greedy",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minimal" | "exact" | "minimal-repair" => Ok(BaselineKind::MinimalRepair),
            "bfs-flip" | "flip" => Ok(BaselineKind::BfsFlip),
            "greedy" | "greedy-repair" => Ok(BaselineKind::GreedyRepair),
            other => Err(format!("unknown baseline `{other}` (minimal, bfs-flip, greedy)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Baseline {
    kind: BaselineKind,
    c: u64,
    core: ColoredGraph,
}

impl Baseline {
    pub fn new(kind: BaselineKind, c: u64, graph: DynamicGraph) -> Result<Self, EngineError> {
        if c < 2 {
            return Err(EngineError::InvalidParameter("c must be at least 2".into()));
        }
        if kind == BaselineKind::BfsFlip && c != 2 {
            return Err(EngineError::InvalidParameter("bfs-flip maintains 2-colorings only".into()));
        }
        let mut b = Baseline { kind, c, core: ColoredGraph::new(graph) };
        b.initial_coloring()?;
        b.core.refresh_distinct();
        Ok(b)
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    fn col(&self, v: VertexId) -> Option<u64> {
        self.core.color(v).map(|c| c.0)
    }

    /// BFS 2-coloring per component (smallest id gets color 1), greedy fallback.
    fn initial_coloring(&mut self) -> Result<(), EngineError> {
        let mut side: FxHashMap<VertexId, u64> = FxHashMap::default();
        for root in self.core.graph.sorted_vertices() {
            if side.contains_key(&root) {
                continue;
            }
            let comp = self.core.graph.component(root);
            let mut ok = true;
            side.insert(root, 1);
            for &u in &comp {
                let su = side[&u];
                for &w in self.core.graph.neighbors(u) {
                    match side.get(&w) {
                        Some(&sw) if sw == su => ok = false,
                        Some(_) => {}
                        None => {
                            side.insert(w, 3 - su);
                        }
                    }
                }
            }
            if !ok {
                for &u in &comp {
                    side.remove(&u);
                }
                for &u in &comp {
                    let used: FxHashSet<u64> =
                        self.core.graph.neighbors(u).iter().filter_map(|w| side.get(w).copied()).collect();
                    let c = (1..=self.c).find(|c| !used.contains(c)).ok_or_else(|| {
                        EngineError::RepairFailed(format!("greedy could not {}-color the initial graph", self.c))
                    })?;
                    side.insert(u, c);
                }
            }
        }
        let mut all: Vec<_> = side.into_iter().collect();
        all.sort_unstable();
        for (v, c) in all {
            self.core.assign(v, Color(c));
        }
        Ok(())
    }

    fn free_color(&self, v: VertexId) -> Option<u64> {
        let used: FxHashSet<u64> = self.core.graph.neighbors(v).iter().filter_map(|&w| self.col(w)).collect();
        (1..=self.c).find(|c| !used.contains(c))
    }

    fn set(&mut self, changes: Vec<(VertexId, u64)>) {
        for (v, c) in changes {
            self.core.assign(v, Color(c));
        }
    }

    fn repair(&mut self, anchor: VertexId, other: Option<VertexId>) -> Result<(), EngineError> {
        let changes = match self.kind {
            BaselineKind::MinimalRepair => self.minimal_repair(anchor)?,
            BaselineKind::BfsFlip => self.flip_repair(anchor, other)?,
            BaselineKind::GreedyRepair => self.greedy_repair(anchor, other)?,
        };
        self.set(changes);
        Ok(())
    }

    fn minimal_repair(&self, anchor: VertexId) -> Result<Vec<(VertexId, u64)>, EngineError> {
        let comp = self.core.graph.component(anchor);
        let degree_sum: usize = comp.iter().map(|&v| self.core.graph.degree(v)).sum();
        let cur: Vec<Option<u64>> = comp.iter().map(|&v| self.col(v)).collect();
        let target = if degree_sum / 2 + 1 == comp.len() {
            tree_min_repair(&self.core.graph, &comp, &cur, self.c)
        } else if comp.len() <= BRANCH_AND_BOUND_LIMIT {
            bnb_min_repair(&self.core.graph, &comp, &cur, self.c).ok_or_else(|| {
                EngineError::RepairFailed(format!("component of {anchor} is not {}-colorable", self.c))
            })?
        } else {
            return Err(EngineError::RepairFailed(format!(
                "non-tree component of {} vertices exceeds the exact budget",
                comp.len()
            )));
        };
        Ok(comp.iter().zip(target).zip(cur).filter(|((_, t), c)| Some(*t) != *c).map(|((&v, t), _)| (v, t)).collect())
    }

    /// Vertices reachable from `start` without crossing the edge `start`-`skip`.
    fn side_of(&self, start: VertexId, skip: VertexId) -> Vec<VertexId> {
        let mut seen = FxHashSet::default();
        seen.insert(start);
        let mut queue = VecDeque::from([start]);
        let mut out = Vec::new();
        while let Some(x) = queue.pop_front() {
            out.push(x);
            for &w in self.core.graph.neighbors(x) {
                if (x == start && w == skip) || !seen.insert(w) {
                    continue;
                }
                queue.push_back(w);
            }
        }
        out
    }

    fn flip_repair(&self, anchor: VertexId, other: Option<VertexId>) -> Result<Vec<(VertexId, u64)>, EngineError> {
        let flip = |side: Vec<VertexId>| -> Vec<(VertexId, u64)> {
            side.into_iter().filter_map(|x| self.col(x).map(|c| (x, 3 - c))).collect()
        };
        match other {
            Some(u) => {
                let (a, b) = (self.side_of(anchor, u), self.side_of(u, anchor));
                if a.contains(&u) {
                    return Err(EngineError::RepairFailed(format!("odd cycle through {u}-{anchor}")));
                }
                Ok(flip(if b.len() < a.len() { b } else { a }))
            }
            None => {
                // new vertex: take color 1, flip every neighbor component that also has 1
                let mut out = vec![(anchor, 1)];
                for &w in self.core.graph.neighbors(anchor) {
                    if self.col(w) == Some(1) {
                        out.extend(flip(self.side_of(w, anchor)));
                    }
                }
                Ok(out)
            }
        }
    }

    fn greedy_repair(&self, anchor: VertexId, other: Option<VertexId>) -> Result<Vec<(VertexId, u64)>, EngineError> {
        let mut colors: FxHashMap<VertexId, Option<u64>> = FxHashMap::default();
        let get = |colors: &FxHashMap<VertexId, Option<u64>>, v: VertexId| -> Option<u64> {
            colors.get(&v).copied().unwrap_or_else(|| self.col(v))
        };
        let (start, parent) = match other {
            Some(u) if u > anchor => (u, Some(anchor)),
            Some(u) => (anchor, Some(u)),
            None => (anchor, None),
        };
        let mut queue = VecDeque::from([(start, parent)]);
        let mut visited = FxHashSet::default();
        while let Some((x, p)) = queue.pop_front() {
            let cx = get(&colors, x);
            let nbrs = self.core.graph.neighbors(x);
            if cx.is_some() && !nbrs.iter().any(|&w| get(&colors, w) == cx) {
                continue;
            }
            if !visited.insert(x) {
                return Err(EngineError::RepairFailed(format!("greedy repair revisited {x}")));
            }
            let mut hist = vec![0usize; self.c as usize + 1];
            for &w in nbrs {
                if let Some(c) = get(&colors, w) {
                    hist[c as usize] += 1;
                }
            }
            let banned = p.and_then(|p| get(&colors, p));
            let pick =
                (1..=self.c).filter(|&c| Some(c) != banned).min_by_key(|&c| (hist[c as usize], c)).expect("c >= 2");
            colors.insert(x, Some(pick));
            if hist[pick as usize] > 0 {
                for &w in nbrs {
                    if Some(w) != p && get(&colors, w) == Some(pick) {
                        queue.push_back((w, Some(x)));
                    }
                }
            }
        }
        let mut out: Vec<_> = colors.into_iter().filter_map(|(v, c)| c.map(|c| (v, c))).collect();
        out.sort_unstable();
        Ok(out)
    }

    fn ensure_proper_around(&self, vs: &[VertexId]) -> Result<(), EngineError> {
        for &v in vs {
            for &w in self.core.graph.neighbors(v) {
                if self.col(v) == self.col(w) {
                    return Err(EngineError::RepairFailed(format!("conflict {v}-{w} left after repair")));
                }
            }
        }
        Ok(())
    }
}

/// Exact minimum-change recoloring of a tree component into `1..=c`.
/// Ties keep current colors first, then prefer smaller colors.
pub fn tree_min_repair(graph: &DynamicGraph, comp: &[VertexId], cur: &[Option<u64>], c: u64) -> Vec<u64> {
    let n = comp.len();
    let k = c as usize;
    let index: FxHashMap<VertexId, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // comp is in BFS order from comp[0], so parents precede children
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    for (i, &u) in comp.iter().enumerate() {
        for w in graph.neighbors(u) {
            let j = index[w];
            if !seen[j] {
                seen[j] = true;
                parent[j] = i;
            }
        }
    }
    let mut cost = vec![0u64; n * k];
    for i in 0..n {
        for col in 0..k {
            cost[i * k + col] = u64::from(cur[i] != Some(col as u64 + 1));
        }
    }
    let pref = |i: usize, col: usize| (cur[i] != Some(col as u64 + 1), col);
    for i in (1..n).rev() {
        let row = &cost[i * k..(i + 1) * k];
        let (best, second) = two_best(row);
        let p = parent[i];
        for col in 0..k {
            let add = if col == best.1 { second } else { best.0 };
            cost[p * k + col] += add;
        }
    }
    let mut out = vec![0u64; n];
    let pick = |i: usize, banned: Option<usize>, cost: &[u64]| -> usize {
        (0..k).filter(|&col| Some(col) != banned).min_by_key(|&col| (cost[i * k + col], pref(i, col))).expect("c >= 2")
    };
    let mut chosen = vec![0usize; n];
    for i in 0..n {
        let banned = (i > 0).then(|| chosen[parent[i]]);
        chosen[i] = pick(i, banned, &cost);
        out[i] = chosen[i] as u64 + 1;
    }
    out
}

/// `(min value, its index)` and the second smallest value.
fn two_best(row: &[u64]) -> ((u64, usize), u64) {
    let mut best = (u64::MAX, 0);
    let mut second = u64::MAX;
    for (i, &v) in row.iter().enumerate() {
        if v < best.0 {
            second = best.0;
            best = (v, i);
        } else if v < second {
            second = v;
        }
    }
    (best, second)
}

/// Exact minimum-change proper c-coloring of a small component by branch and bound.
pub fn bnb_min_repair(graph: &DynamicGraph, comp: &[VertexId], cur: &[Option<u64>], c: u64) -> Option<Vec<u64>> {
    let n = comp.len();
    let index: FxHashMap<VertexId, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let earlier: Vec<Vec<usize>> =
        (0..n).map(|i| graph.neighbors(comp[i]).iter().map(|w| index[w]).filter(|&j| j < i).collect()).collect();
    struct Search<'a> {
        earlier: &'a [Vec<usize>],
        cur: &'a [Option<u64>],
        c: u64,
        assign: Vec<u64>,
        best: Option<(u64, Vec<u64>)>,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, cost: u64) {
            if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
                return;
            }
            if i == self.assign.len() {
                self.best = Some((cost, self.assign.clone()));
                return;
            }
            let mut order: Vec<u64> = (1..=self.c).collect();
            if let Some(cc) = self.cur[i] {
                order.retain(|&x| x != cc);
                order.insert(0, cc);
            }
            for col in order {
                if self.earlier[i].iter().all(|&j| self.assign[j] != col) {
                    self.assign[i] = col;
                    let step = u64::from(self.cur[i] != Some(col));
                    self.go(i + 1, cost + step);
                }
            }
            self.assign[i] = 0;
        }
    }
    let mut s = Search { earlier: &earlier, cur, c, assign: vec![0; n], best: None };
    s.go(0, 0);
    s.best.map(|(_, a)| a)
}

impl Recolorer for Baseline {
    fn name(&self) -> String {
        format!("baseline-{}", self.kind)
    }

    fn apply(&mut self, op: &UpdateOp) -> Result<u64, EngineError> {
        self.core.graph.validate(op)?;
        self.core.begin_update();
        match op {
            UpdateOp::InsertVertex(v, _) => {
                self.core.graph.apply(op)?;
                match self.free_color(*v) {
                    Some(c) => {
                        self.core.assign(*v, Color(c));
                    }
                    None => self.repair(*v, None)?,
                }
                self.ensure_proper_around(&[*v])?;
            }
            UpdateOp::InsertEdge(u, v) => {
                self.core.graph.apply(op)?;
                if self.col(*u) == self.col(*v) {
                    self.repair(*u, Some(*v))?;
                    self.ensure_proper_around(&[*u, *v])?;
                }
            }
            UpdateOp::DeleteVertex(v) => {
                self.core.graph.apply(op)?;
                self.core.unassign(*v);
            }
            UpdateOp::DeleteEdge(..) => self.core.graph.apply(op)?,
        }
        Ok(self.core.finish_update(op.is_insertion()))
    }

    fn state(&self) -> &ColoredGraph {
        &self.core
    }

    fn color_budget(&self) -> Option<u64> {
        Some(self.c)
    }
}
