//! Serialized run and arena reports. Everything here is a pure function of the inputs.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;

use crate::adversary::ChargeLedger;

pub const RUN_SCHEMA: &str = "dyncolor.run.v1";
pub const SWEEP_SCHEMA: &str = "dyncolor.sweep.v1";
pub const ARENA_SCHEMA: &str = "dyncolor.arena.v1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub engine: String,
    pub d: u32,
    pub colorer: String,
    pub input: String,
    pub updates: u64,
    pub insertion_updates: u64,
    pub s_history: Vec<u64>,
    pub s_final: u64,
    pub s_max: u64,
    pub resets: u64,
    pub recolorings_total: u64,
    pub recolorings_per_update: Vec<u64>,
    pub max_per_update: u64,
    pub distinct_colors_now: u64,
    pub distinct_colors_max: u64,
    pub bucket_colors_max: u64,
    /// Largest color budget seen; each update is checked against the budget in force after it.
    pub color_budget_max: Option<u64>,
    pub color_budget_violations: u64,
    pub per_update_cap_max: Option<u64>,
    pub per_update_cap_violations: u64,
    /// `(d+2) * insertion_updates` for small, `(d+1) * s_max * insertion_updates` for big.
    pub amortized_budget: Option<u64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "engine {} d={} colorer={} input={}", self.engine, self.d, self.colorer, self.input);
        let _ = writeln!(
            s,
            "updates {} (insertion-type {}), resets {}, s final {} max {}",
            self.updates, self.insertion_updates, self.resets, self.s_final, self.s_max
        );
        let _ = writeln!(
            s,
            "recolorings total {} max/update {}{}",
            self.recolorings_total,
            self.max_per_update,
            self.amortized_budget.map_or(String::new(), |b| format!(" (amortized budget {b})"))
        );
        let _ = writeln!(
            s,
            "colors now {} max {} bucket max {}{}",
            self.distinct_colors_now,
            self.distinct_colors_max,
            self.bucket_colors_max,
            self.color_budget_max.map_or(String::new(), |b| format!(" (budget {b})"))
        );
        if self.color_budget_violations + self.per_update_cap_violations > 0 {
            let _ = writeln!(
                s,
                "VIOLATIONS: color budget {} per-update cap {}",
                self.color_budget_violations, self.per_update_cap_violations
            );
        }
        let _ = writeln!(s, "wall time {:.3}s", self.wall_time.as_secs_f64());
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub d: u32,
    pub s_final: u64,
    pub s_max: u64,
    pub colors_max: u64,
    pub recolorings_total: u64,
    pub max_per_update: u64,
    pub color_budget_max: Option<u64>,
    pub amortized_budget: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub engine: String,
    pub colorer: String,
    pub input: String,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let mut s = format!("sweep {} colorer={} input={}\n", self.engine, self.colorer, self.input);
        let _ =
            writeln!(s, "{:>4} {:>6} {:>10} {:>14} {:>12}", "d", "s_max", "colors_max", "recolorings", "max/update");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>4} {:>6} {:>10} {:>14} {:>12}",
                r.d, r.s_max, r.colors_max, r.recolorings_total, r.max_per_update
            );
        }
        s
    }
}

/// A lower-bound floor and whether the run met it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FloorCheck {
    pub description: String,
    pub required: u64,
    pub achieved: u64,
    pub met: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArenaReport {
    pub schema: &'static str,
    pub adversary: String,
    pub algorithm: String,
    pub c: u64,
    pub n: u64,
    pub m: u64,
    pub vertices: u64,
    pub updates: u64,
    pub insertions: u64,
    pub deletions: u64,
    pub observed_recolorings: u64,
    pub forced_total: u64,
    pub attributed: Vec<u64>,
    pub floors: Vec<FloorCheck>,
    pub ledger: ChargeLedger,
    pub run: RunReport,
}

impl ArenaReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn floors_met(&self) -> bool {
        self.floors.iter().all(|f| f.met)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ =
            writeln!(s, "arena {} vs {} (c={}, {} vertices)", self.adversary, self.algorithm, self.c, self.vertices);
        let _ = writeln!(
            s,
            "updates {} (insertions {}, deletions {}), recolorings observed {} forced {}",
            self.updates, self.insertions, self.deletions, self.observed_recolorings, self.forced_total
        );
        let _ = writeln!(
            s,
            "wasted insertions {}, charged recolorings {}, resets {}, links {}, cycles {}",
            self.ledger.wasted_insertions,
            self.ledger.charged_recolorings,
            self.ledger.resets.len(),
            self.ledger.links.len(),
            self.ledger.cycles.len()
        );
        for f in &self.floors {
            let _ = writeln!(
                s,
                "floor {}: required {} achieved {} {}",
                f.description,
                f.required,
                f.achieved,
                if f.met { "ok" } else { "MISSED" }
            );
        }
        let _ = writeln!(s, "wall time {:.3}s", self.run.wall_time.as_secs_f64());
        s
    }
}
