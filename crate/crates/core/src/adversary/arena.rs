//! Turn-by-turn game between an adaptive update generator and a recoloring algorithm.

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EngineError, Recolorer};
use crate::graph::{UpdateOp, VertexId};
use crate::ledger::{Color, ColorChange, ColoredGraph};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("algorithm uses {0} colors, the adversary expects exactly 2")]
    NotTwoColored(usize),
    #[error("vertex {vertex} got color {color}, outside 1..={c}")]
    ColorBudgetExceeded { vertex: VertexId, color: Color, c: u64 },
    #[error("validity exhausted: {0}")]
    ValidityExhausted(String),
    #[error("structural audit failed: {0}")]
    Audit(String),
    #[error("algorithm failed at update {update}: {source}")]
    Engine { update: u64, source: EngineError },
}

/// One matching link and the recolorings it forced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkRecord {
    pub update: u64,
    pub forced: u64,
}

/// One cycle of the three-color construction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    pub updates: u64,
    pub link_costs: Vec<u64>,
    pub cuts: u64,
    /// Recolorings of the invalidated tree's leaves, if the cycle ended by invalidation.
    pub invalidation_cost: Option<u64>,
    pub recolorings: u64,
    pub complete: bool,
}

/// One reset phase of the general construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResetRecord {
    pub update: u64,
    pub level: usize,
    pub case: u8,
    /// Wasted edge insertions.
    pub h: u64,
    pub charged: u64,
    pub y0: u64,
    pub y1: u64,
    pub y2: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChargeLedger {
    pub wasted_insertions: u64,
    pub charged_recolorings: u64,
    pub links: Vec<LinkRecord>,
    pub cycles: Vec<CycleRecord>,
    pub resets: Vec<ResetRecord>,
}

/// An adaptive generator that sees the full coloring after every update.
pub trait Adversary {
    fn name(&self) -> String;

    /// Number of colors the algorithm must stay within.
    fn c(&self) -> u64;

    /// Next update, or `None` when the construction has nothing left to do.
    fn next_op(&mut self, view: &ColoredGraph) -> Result<Option<UpdateOp>, AdversaryError>;

    /// Called after the algorithm applied `op`. `forced` includes recolorings deferred from deletions.
    fn observe(
        &mut self,
        op: &UpdateOp,
        view: &ColoredGraph,
        changes: &[ColorChange],
        forced: u64,
    ) -> Result<(), AdversaryError>;

    fn ledger(&self) -> &ChargeLedger;

    /// Whether an arena run may stop early.
    fn done(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ArenaOutcome {
    pub adversary: String,
    pub algorithm: String,
    pub c: u64,
    pub updates: u64,
    pub insertions: u64,
    pub deletions: u64,
    pub observed_recolorings: u64,
    /// Recolorings per update, with deletion-time recolorings moved to the next insertion.
    pub attributed: Vec<u64>,
    pub ledger: ChargeLedger,
    #[serde(skip)]
    pub ops: Vec<UpdateOp>,
}

fn check_palette(c: u64, changes: &[ColorChange]) -> Result<(), AdversaryError> {
    for ch in changes {
        if let Some(col) = ch.new {
            if col.0 < 1 || col.0 > c {
                return Err(AdversaryError::ColorBudgetExceeded { vertex: ch.vertex, color: col, c });
            }
        }
    }
    Ok(())
}

/// Plays up to `m` updates, or until the adversary reports it is done.
pub fn arena_run(
    adversary: &mut dyn Adversary,
    algorithm: &mut dyn Recolorer,
    m: u64,
) -> Result<ArenaOutcome, AdversaryError> {
    let c = adversary.c();
    check_palette(c, algorithm.state().ledger.changes())?;
    let mut out = ArenaOutcome { adversary: adversary.name(), algorithm: algorithm.name(), c, ..Default::default() };
    let mut deferred = 0u64;
    while out.updates < m && !adversary.done() {
        let Some(op) = adversary.next_op(algorithm.state())? else {
            break;
        };
        let before = algorithm.state().ledger.changes().len();
        let k = algorithm.apply(&op).map_err(|source| AdversaryError::Engine { update: out.updates + 1, source })?;
        let view = algorithm.state();
        let changes = &view.ledger.changes()[before..];
        check_palette(c, changes)?;
        out.updates += 1;
        out.observed_recolorings += k;
        let forced = if op.is_insertion() {
            out.insertions += 1;
            let f = k + deferred;
            deferred = 0;
            f
        } else {
            out.deletions += 1;
            deferred += k;
            0
        };
        out.attributed.push(forced);
        adversary.observe(&op, view, changes, forced)?;
        out.ops.push(op);
    }
    out.ledger = adversary.ledger().clone();
    Ok(out)
}
