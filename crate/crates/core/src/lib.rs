//! Proper vertex coloring of fully dynamic graphs with few recolorings.
//!
//! The bucket engines trade colors for recolorings through a parameter `d`:
//! [`small::SmallBuckets`] uses `O(d N^{1/d})` colors and `O(d)` amortized
//! recolorings per update, [`big::BigBuckets`] the reverse. The
//! [`deamortized`] engines give the same bounds in the worst case. The
//! [`adversary`] module drives c-coloring algorithms through the
//! lower-bound constructions and audits the charging argument.

pub mod adversary;
pub mod big;
pub mod colorers;
pub mod deamortized;
pub mod engine;
pub mod graph;
pub mod harness;
pub mod ledger;
pub mod small;

pub use colorers::{Palette, StaticColorer};
pub use engine::{build_engine, EngineError, EngineKind, Recolorer};
pub use graph::{DynamicGraph, GraphError, UpdateOp, VertexId};
pub use ledger::{check_proper, Color, ColoredGraph, ColoringLedger, Metrics};
