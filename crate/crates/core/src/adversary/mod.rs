//! Adaptive lower-bound constructions and the arena they play in.

pub mod arena;
pub mod baselines;
pub mod c3;
pub mod general;
pub mod stars;

pub use arena::{
    arena_run, Adversary, AdversaryError, ArenaOutcome, ChargeLedger, CycleRecord, LinkRecord, ResetRecord,
};
pub use baselines::{Baseline, BaselineKind};
pub use c3::{build_c3, C3Adversary};
pub use general::{build_general, GeneralAdversary, GeneralParams};
pub use stars::{build_stars_c2, StarsAdversary};
