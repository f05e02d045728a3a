//! Coloring ledger, metrics, and the colored graph every engine owns.

use std::collections::BTreeMap;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DynamicGraph, VertexId};

/// Global color index. Engines pack a palette slot into the high 32 bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(pub u64);

impl Color {
    pub const SLOT_SHIFT: u32 = 32;

    pub fn packed(slot: u64, local: u64) -> Self {
        Color((slot << Self::SLOT_SHIFT) | local)
    }

    pub fn slot(self) -> u64 {
        self.0 >> Self::SLOT_SHIFT
    }

    pub fn local(self) -> u64 {
        self.0 & ((1 << Self::SLOT_SHIFT) - 1)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorChange {
    pub update: u64,
    pub vertex: VertexId,
    pub old: Option<Color>,
    /// `None` records removal of a deleted vertex.
    pub new: Option<Color>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("vertex {0} has no color")]
pub struct UncoloredVertex(pub VertexId);

#[derive(Clone, Debug, Default)]
pub struct ColoringLedger {
    colors: FxHashMap<VertexId, Color>,
    changes: Vec<ColorChange>,
    in_use: FxHashMap<Color, u32>,
}

impl ColoringLedger {
    pub fn color(&self, v: VertexId) -> Option<Color> {
        self.colors.get(&v).copied()
    }

    pub fn colors(&self) -> &FxHashMap<VertexId, Color> {
        &self.colors
    }

    pub fn changes(&self) -> &[ColorChange] {
        &self.changes
    }

    pub fn distinct_colors(&self) -> usize {
        self.in_use.len()
    }

    /// Multiset of colors currently in use.
    pub fn color_counts(&self) -> BTreeMap<Color, u32> {
        self.in_use.iter().map(|(&c, &n)| (c, n)).collect()
    }

    /// Appends an entry and returns whether it counts as a recoloring.
    /// Entries at update 0 form the initial coloring and are never counted.
    pub fn record(&mut self, metrics: &mut Metrics, update: u64, v: VertexId, new: Option<Color>) -> bool {
        let old = match new {
            Some(c) => self.colors.insert(v, c),
            None => self.colors.remove(&v),
        };
        if old == new {
            self.changes.push(ColorChange { update, vertex: v, old, new });
            return false;
        }
        if let Some(c) = old {
            let n = self.in_use.get_mut(&c).expect("color in use");
            *n -= 1;
            if *n == 0 {
                self.in_use.remove(&c);
            }
        }
        if let Some(c) = new {
            *self.in_use.entry(c).or_insert(0) += 1;
        }
        self.changes.push(ColorChange { update, vertex: v, old, new });
        let counted = new.is_some() && update > 0;
        if counted {
            metrics.pending += 1;
        }
        counted
    }

    /// Rebuilds the color map from the change log alone.
    pub fn replay(&self) -> FxHashMap<VertexId, Color> {
        let mut out = FxHashMap::default();
        for ch in &self.changes {
            match ch.new {
                Some(c) => {
                    out.insert(ch.vertex, c);
                }
                None => {
                    out.remove(&ch.vertex);
                }
            }
        }
        out
    }
}

/// Per-run counters. `recolorings_total` always equals the sum of `recolorings_per_update`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub updates_applied: u64,
    pub recolorings_total: u64,
    pub recolorings_per_update: Vec<u64>,
    pub max_per_update: u64,
    pub distinct_colors_now: u64,
    pub distinct_colors_max: u64,
    pub resets: u64,
    /// Vertex insertions plus edge insertions that forced a reinsertion.
    pub insertion_updates: u64,
    /// Largest number of colors the static colorer used inside one bucket.
    pub bucket_colors_max: u64,
    pub s_history: Vec<u64>,
    #[serde(skip)]
    pending: u64,
}

impl Metrics {
    pub fn note_bucket_colors(&mut self, k: u64) {
        self.bucket_colors_max = self.bucket_colors_max.max(k);
    }
}

/// True iff no edge is monochromatic.
pub fn check_proper(graph: &DynamicGraph, ledger: &ColoringLedger) -> Result<bool, UncoloredVertex> {
    let colors = ledger.colors();
    for u in graph.vertices() {
        let cu = *colors.get(&u).ok_or(UncoloredVertex(u))?;
        for w in graph.neighbors(u) {
            if *w > u {
                let cw = *colors.get(w).ok_or(UncoloredVertex(*w))?;
                if cu == cw {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// First monochromatic edge, if any.
pub fn find_conflict(graph: &DynamicGraph, ledger: &ColoringLedger) -> Option<(VertexId, VertexId)> {
    graph.edges().find(|&(u, v)| ledger.color(u).is_some() && ledger.color(u) == ledger.color(v))
}

/// A graph together with its coloring ledger and metrics.
#[derive(Clone, Debug, Default)]
pub struct ColoredGraph {
    pub graph: DynamicGraph,
    pub ledger: ColoringLedger,
    pub metrics: Metrics,
    update: u64,
}

impl ColoredGraph {
    pub fn new(graph: DynamicGraph) -> Self {
        ColoredGraph { graph, ..Default::default() }
    }

    /// Index of the update in progress (0 during initialization).
    pub fn current_update(&self) -> u64 {
        self.update
    }

    pub fn color(&self, v: VertexId) -> Option<Color> {
        self.ledger.color(v)
    }

    pub fn assign(&mut self, v: VertexId, c: Color) -> bool {
        self.ledger.record(&mut self.metrics, self.update, v, Some(c))
    }

    pub fn unassign(&mut self, v: VertexId) {
        self.ledger.record(&mut self.metrics, self.update, v, None);
    }

    pub fn begin_update(&mut self) {
        self.update += 1;
        self.metrics.pending = 0;
    }

    /// Recolorings counted so far in the update in progress.
    pub fn pending(&self) -> u64 {
        self.metrics.pending
    }

    /// Closes the current update and returns its recoloring count.
    pub fn finish_update(&mut self, insertion_type: bool) -> u64 {
        let m = &mut self.metrics;
        let k = m.pending;
        m.pending = 0;
        m.updates_applied += 1;
        m.recolorings_total += k;
        m.recolorings_per_update.push(k);
        m.max_per_update = m.max_per_update.max(k);
        if insertion_type {
            m.insertion_updates += 1;
        }
        self.refresh_distinct();
        k
    }

    /// Drops the in-progress update after a rejected op (graph untouched).
    pub fn abort_update(&mut self) {
        self.update -= 1;
        self.metrics.pending = 0;
    }

    pub fn refresh_distinct(&mut self) {
        let now = self.ledger.distinct_colors() as u64;
        self.metrics.distinct_colors_now = now;
        self.metrics.distinct_colors_max = self.metrics.distinct_colors_max.max(now);
    }

    pub fn is_proper(&self) -> Result<bool, UncoloredVertex> {
        check_proper(&self.graph, &self.ledger)
    }
}
