//! Runtime audit of the de-amortization lemmas.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

/// Lemma identifiers used in reports.
pub mod lemma {
    pub const EMPTY_LEVEL0: &str = "empty-level0-bucket";
    pub const DRAIN_BOUND: &str = "drain-bound";
    pub const REFILL_INTERVAL: &str = "refill-interval";
    pub const EMPTY_DESTINATION: &str = "empty-destination";
    pub const SECONDARY_RESET_EMPTY: &str = "secondary-reset-empty";
    pub const SECONDARY_EMPTY_ON_PLACE: &str = "secondary-empty-on-placement";
    pub const SECONDARY_CONTENTS: &str = "secondary-holds-reals-with-shadow";
    pub const SIM_PROPER: &str = "simulated-coloring-proper";
    pub const REAL_PROPER: &str = "real-coloring-proper";
    pub const SIM_CAPACITY: &str = "simulated-capacity";
    pub const SIM_SPACE: &str = "simulated-space-invariant";
    pub const HIGH_POINT: &str = "simulated-high-point";
    pub const S_MONOTONE: &str = "s-non-decreasing";
    pub const BUDGET: &str = "per-update-budget";
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("{lemma} violated: {detail} [{digest}]")]
pub struct LemmaViolation {
    pub lemma: &'static str,
    pub detail: String,
    pub digest: String,
}

/// How many times each lemma check has been exercised.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub exercised: BTreeMap<&'static str, u64>,
}

impl AuditReport {
    pub fn count(&self, lemma: &str) -> u64 {
        self.exercised.get(lemma).copied().unwrap_or(0)
    }
}

/// Event-time checks accumulated while updates run.
#[derive(Clone, Debug, Default)]
pub(crate) struct EventLog {
    pub counts: BTreeMap<&'static str, u64>,
    pub first_violation: Option<LemmaViolation>,
}

impl EventLog {
    pub fn pass(&mut self, lemma: &'static str) {
        *self.counts.entry(lemma).or_insert(0) += 1;
    }

    pub fn fail(&mut self, v: LemmaViolation) {
        *self.counts.entry(v.lemma).or_insert(0) += 1;
        if self.first_violation.is_none() {
            self.first_violation = Some(v);
        }
    }
}
