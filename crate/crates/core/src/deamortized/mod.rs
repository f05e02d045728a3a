//! De-amortized engines built on shadow vertices.

pub mod audit;
mod big;
pub mod overlay;
mod small;

pub use audit::{AuditReport, LemmaViolation};
pub use big::{BigDeamAddress, DeamBig};
pub use overlay::{Placement, ShadowOverlay};
pub use small::{DeamAddress, DeamSmall};
