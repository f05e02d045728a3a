//! Engine interface shared by the bucket engines, plus sizing helpers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colorers::{colors_used, ColorError, Coloring, Palette, StaticColorer};
use crate::graph::{DynamicGraph, GraphError, UpdateOp, VertexId};
use crate::ledger::{Color, ColoredGraph};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("repair failed: {0}")]
    RepairFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A dynamic recoloring strategy.
pub trait Recolorer {
    fn name(&self) -> String;

    /// Applies one update and returns the recolorings it caused.
    fn apply(&mut self, op: &UpdateOp) -> Result<u64, EngineError>;

    fn state(&self) -> &ColoredGraph;

    /// Structural self-check, meant to run after every update in checked mode.
    fn check_invariants(&self) -> Result<(), EngineError> {
        Ok(())
    }

    /// Upper bound on distinct colors implied by the current parameters and `bucket_colors_max`.
    fn color_budget(&self) -> Option<u64> {
        None
    }

    /// Worst-case recolorings allowed in a single update, when the engine guarantees one.
    fn per_update_cap(&self) -> Option<u64> {
        None
    }

    /// Current sizing base.
    fn s(&self) -> Option<u64> {
        None
    }
}

/// Smallest `s` with `s^d >= n`.
pub fn ceil_root(n: u64, d: u32) -> u64 {
    if n <= 1 || d == 1 {
        return n;
    }
    let mut s = (n as f64).powf(1.0 / d as f64).round() as u64;
    s = s.max(1);
    while s > 1 && pow_sat(s - 1, d) >= n {
        s -= 1;
    }
    while pow_sat(s, d) < n {
        s += 1;
    }
    s
}

/// `base^exp`, saturating at `u64::MAX`.
pub fn pow_sat(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).unwrap_or(u64::MAX)
}

/// Whether `s` may shrink at a reset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SizePolicy {
    #[default]
    Recompute,
    NonDecreasing,
}

/// Lazily allocated, pairwise disjoint palettes keyed by bucket address.
#[derive(Clone, Debug)]
pub struct PaletteBook<K: Ord + Copy> {
    palettes: BTreeMap<K, Palette>,
    next_slot: u64,
    initial_width: u64,
}

impl<K: Ord + Copy> Default for PaletteBook<K> {
    fn default() -> Self {
        PaletteBook { palettes: BTreeMap::new(), next_slot: 1, initial_width: 4 }
    }
}

impl<K: Ord + Copy> PaletteBook<K> {
    pub fn get(&mut self, key: K) -> &mut Palette {
        let slot = &mut self.next_slot;
        let width = self.initial_width;
        self.palettes.entry(key).or_insert_with(|| {
            let p = Palette::new(Color::packed(*slot, 0), width);
            *slot += 1;
            p
        })
    }

    pub fn contains(&self, key: K, c: Color) -> bool {
        self.palettes.get(&key).is_some_and(|p| p.contains(c))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Small,
    Big,
    SmallDeam,
    BigDeam,
}

impl EngineKind {
    pub const ALL: [EngineKind; 4] = [EngineKind::Small, EngineKind::Big, EngineKind::SmallDeam, EngineKind::BigDeam];

    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Small => "small",
            EngineKind::Big => "big",
            EngineKind::SmallDeam => "small-deam",
            EngineKind::BigDeam => "big-deam",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EngineKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown engine `{s}` (small, big, small-deam, big-deam)"))
    }
}

/// Constructs an engine over `initial`.
pub fn build_engine(
    kind: EngineKind,
    d: u32,
    initial: DynamicGraph,
    colorer: StaticColorer,
) -> Result<Box<dyn Recolorer>, EngineError> {
    Ok(match kind {
        EngineKind::Small => Box::new(crate::small::SmallBuckets::new(d, initial, colorer)?),
        EngineKind::Big => Box::new(crate::big::BigBuckets::new(d, initial, colorer)?),
        EngineKind::SmallDeam => Box::new(crate::deamortized::DeamSmall::new(d, initial, colorer)?),
        EngineKind::BigDeam => Box::new(crate::deamortized::DeamBig::new(d, initial, colorer)?),
    })
}

/// Colors `subset` with the palette of `key` and records the colors used.
pub(crate) fn color_bucket<K: Ord + Copy>(
    core: &mut ColoredGraph,
    book: &mut PaletteBook<K>,
    colorer: StaticColorer,
    key: K,
    subset: &BTreeSet<VertexId>,
) -> Result<Coloring, EngineError> {
    let coloring = colorer.color(&core.graph, subset, book.get(key))?;
    core.metrics.note_bucket_colors(colors_used(&coloring) as u64);
    Ok(coloring)
}

/// Vertex to palette-local color, for one bucket.
pub type BucketContent = BTreeMap<VertexId, u64>;

/// Index-free view of a bucket layout, used to compare engines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Layout {
    pub reset: BucketContent,
    /// Nonempty buckets per level.
    pub levels: Vec<BTreeSet<BucketContent>>,
}
