//! Static colorers used to (re)color the vertices of one bucket.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};
use crate::ledger::Color;

/// Largest subset the exhaustive routines accept.
pub const EXACT_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ColorError {
    #[error("palette of width {width} exhausted (needed {needed})")]
    PaletteExhausted { width: u64, needed: u64 },
    #[error("odd cycle through vertex {0}")]
    OddCycleDetected(VertexId),
    #[error("subset of {0} vertices exceeds the exhaustive budget")]
    TooLarge(usize),
}

/// A contiguous color range `base .. base + width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub base: Color,
    pub width: u64,
    pub growable: bool,
}

impl Palette {
    pub fn new(base: Color, width: u64) -> Self {
        Palette { base, width: width.max(1), growable: true }
    }

    pub fn fixed(base: Color, width: u64) -> Self {
        Palette { base, width, growable: false }
    }

    /// Color with palette-local index `i`, doubling the width when allowed.
    pub fn color(&mut self, i: u64) -> Result<Color, ColorError> {
        if i >= self.width {
            if !self.growable {
                return Err(ColorError::PaletteExhausted { width: self.width, needed: i + 1 });
            }
            while i >= self.width {
                self.width *= 2;
            }
        }
        Ok(Color(self.base.0 + i))
    }

    pub fn contains(&self, c: Color) -> bool {
        c.0 >= self.base.0 && c.0 - self.base.0 < self.width
    }
}

pub type Coloring = BTreeMap<VertexId, Color>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StaticColorer {
    #[default]
    Greedy,
    BipartiteBfs,
    ExactBruteForce,
}

impl StaticColorer {
    pub fn color(
        self,
        graph: &DynamicGraph,
        subset: &BTreeSet<VertexId>,
        palette: &mut Palette,
    ) -> Result<Coloring, ColorError> {
        match self {
            StaticColorer::Greedy => color_greedy(graph, subset, palette),
            StaticColorer::BipartiteBfs => color_bipartite(graph, subset, palette),
            StaticColorer::ExactBruteForce => color_exact(graph, subset, palette),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StaticColorer::Greedy => "greedy",
            StaticColorer::BipartiteBfs => "bipartite",
            StaticColorer::ExactBruteForce => "exact",
        }
    }
}

impl fmt::Display for StaticColorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StaticColorer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "greedy" => Ok(StaticColorer::Greedy),
            "bipartite" | "bipartite-bfs" => Ok(StaticColorer::BipartiteBfs),
            "exact" | "exact-brute-force" => Ok(StaticColorer::ExactBruteForce),
            other => Err(format!("unknown colorer `{other}` (greedy, bipartite, exact)")),
        }
    }
}

/// Number of distinct colors in a coloring.
pub fn colors_used(coloring: &Coloring) -> usize {
    coloring.values().collect::<BTreeSet<_>>().len()
}

/// Ascending ids, lowest free palette color.
pub fn color_greedy(
    graph: &DynamicGraph,
    subset: &BTreeSet<VertexId>,
    palette: &mut Palette,
) -> Result<Coloring, ColorError> {
    let mut local: FxHashMap<VertexId, u64> = FxHashMap::default();
    let mut taken: Vec<bool> = Vec::new();
    let mut out = Coloring::new();
    for &v in subset {
        let nbrs = graph.neighbors(v);
        taken.clear();
        taken.resize(nbrs.len() + 1, false);
        for w in nbrs {
            if let Some(&c) = local.get(w) {
                if (c as usize) < taken.len() {
                    taken[c as usize] = true;
                }
            }
        }
        let c = taken.iter().position(|t| !t).expect("deg+1 slots") as u64;
        local.insert(v, c);
        out.insert(v, palette.color(c)?);
    }
    Ok(out)
}

/// BFS 2-coloring per component, roots at the smallest id.
pub fn color_bipartite(
    graph: &DynamicGraph,
    subset: &BTreeSet<VertexId>,
    palette: &mut Palette,
) -> Result<Coloring, ColorError> {
    let mut side: FxHashMap<VertexId, u64> = FxHashMap::default();
    let mut queue = VecDeque::new();
    for &root in subset {
        if side.contains_key(&root) {
            continue;
        }
        side.insert(root, 0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let su = side[&u];
            for &w in graph.neighbors(u) {
                if !subset.contains(&w) {
                    continue;
                }
                match side.get(&w) {
                    Some(&sw) if sw == su => return Err(ColorError::OddCycleDetected(w)),
                    Some(_) => {}
                    None => {
                        side.insert(w, 1 - su);
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    let c0 = palette.color(0)?;
    let c1 = if side.values().any(|&s| s == 1) { Some(palette.color(1)?) } else { None };
    Ok(subset.iter().map(|v| (*v, if side[v] == 0 { c0 } else { c1.expect("odd side present") })).collect())
}

/// Components of the induced subgraph, each sorted, ordered by smallest member.
fn induced_components(graph: &DynamicGraph, subset: &BTreeSet<VertexId>) -> Vec<Vec<VertexId>> {
    let mut seen = BTreeSet::new();
    let mut comps = Vec::new();
    for &root in subset {
        if !seen.insert(root) {
            continue;
        }
        let mut comp = vec![root];
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            i += 1;
            for &w in graph.neighbors(u) {
                if subset.contains(&w) && seen.insert(w) {
                    comp.push(w);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Adjacency bitmasks of a small vertex list.
fn masks(graph: &DynamicGraph, verts: &[VertexId]) -> Vec<u32> {
    verts
        .iter()
        .map(|&v| verts.iter().enumerate().filter(|(_, &w)| graph.has_edge(v, w)).fold(0u32, |m, (j, _)| m | 1 << j))
        .collect()
}

/// First k-coloring in lexicographic order, if one exists.
fn k_coloring(adj: &[u32], k: u8) -> Option<Vec<u8>> {
    fn go(adj: &[u32], k: u8, i: usize, cols: &mut Vec<u8>) -> bool {
        if i == adj.len() {
            return true;
        }
        // colors above the current maximum + 1 are symmetric
        let cap = cols.iter().copied().max().map_or(1, |m| m + 2).min(k);
        for c in 0..cap {
            if (0..i).all(|j| adj[i] & (1 << j) == 0 || cols[j] != c) {
                cols.push(c);
                if go(adj, k, i + 1, cols) {
                    return true;
                }
                cols.pop();
            }
        }
        false
    }
    let mut cols = Vec::with_capacity(adj.len());
    go(adj, k, 0, &mut cols).then_some(cols)
}

fn optimal(adj: &[u32]) -> Vec<u8> {
    (1..=adj.len().max(1) as u8).find_map(|k| k_coloring(adj, k)).unwrap_or_default()
}

/// Optimal coloring per component; each component must fit the exhaustive budget.
pub fn color_exact(
    graph: &DynamicGraph,
    subset: &BTreeSet<VertexId>,
    palette: &mut Palette,
) -> Result<Coloring, ColorError> {
    let mut out = Coloring::new();
    for comp in induced_components(graph, subset) {
        if comp.len() > EXACT_LIMIT {
            return Err(ColorError::TooLarge(comp.len()));
        }
        let cols = optimal(&masks(graph, &comp));
        for (v, c) in comp.iter().zip(cols) {
            out.insert(*v, palette.color(c as u64)?);
        }
    }
    Ok(out)
}

/// Chromatic number of the induced subgraph by exhaustive search.
pub fn exact_chromatic(graph: &DynamicGraph, subset: &BTreeSet<VertexId>) -> Result<u64, ColorError> {
    if subset.len() > EXACT_LIMIT {
        return Err(ColorError::TooLarge(subset.len()));
    }
    if subset.is_empty() {
        return Ok(0);
    }
    let verts: Vec<_> = subset.iter().copied().collect();
    let adj = masks(graph, &verts);
    Ok(optimal(&adj).iter().copied().max().map_or(0, |m| m as u64 + 1))
}
