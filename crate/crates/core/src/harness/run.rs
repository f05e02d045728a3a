//! Drives engines over streams, sweeps `d`, and plays adversary arenas.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use super::gen::{generate, StreamSpec};
use super::report::{
    ArenaReport, FloorCheck, RunReport, SweepReport, SweepRow, ARENA_SCHEMA, RUN_SCHEMA, SWEEP_SCHEMA,
};
use super::stream::{format_graph, format_stream, read_stream, StreamError};
use crate::adversary::{
    arena_run, build_c3, build_general, build_stars_c2, Adversary, AdversaryError, Baseline, BaselineKind,
    GeneralParams,
};
use crate::colorers::StaticColorer;
use crate::engine::{build_engine, ceil_root, pow_sat, EngineError, EngineKind, Recolorer};
use crate::graph::{DynamicGraph, UpdateOp};
use crate::ledger::{ColoredGraph, Metrics};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("update {update}: {source}")]
    Engine { update: u64, source: EngineError },
    #[error("update {update}: coloring is not proper")]
    Improper { update: u64 },
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl HarnessError {
    /// Index of the failing update, counting from 1, when one is known.
    pub fn update(&self) -> Option<u64> {
        match self {
            HarnessError::Engine { update, .. } | HarnessError::Improper { update } => Some(*update),
            HarnessError::Adversary(AdversaryError::Engine { update, .. }) => Some(*update),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputSource {
    Path(PathBuf),
    Generated(StreamSpec),
    Ops { label: String, ops: Vec<UpdateOp> },
}

impl InputSource {
    pub fn label(&self) -> String {
        match self {
            InputSource::Path(p) => p.display().to_string(),
            InputSource::Generated(s) => format!(
                "generated(seed={},updates={},max_vertices={},forest={})",
                s.seed, s.updates, s.max_vertices, s.forest
            ),
            InputSource::Ops { label, .. } => label.clone(),
        }
    }

    pub fn load(&self) -> Result<Vec<UpdateOp>, HarnessError> {
        Ok(match self {
            InputSource::Path(p) => read_stream(p)?,
            InputSource::Generated(s) => generate(s),
            InputSource::Ops { ops, .. } => ops.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub engine: EngineKind,
    pub d: u32,
    pub colorer: StaticColorer,
    pub input: InputSource,
    /// Check invariants and properness after every update.
    pub checked: bool,
}

impl RunConfig {
    pub fn new(engine: EngineKind, d: u32, colorer: StaticColorer, input: InputSource) -> Self {
        RunConfig { engine, d, colorer, input, checked: false }
    }

    pub fn checked(mut self) -> Self {
        self.checked = true;
        self
    }
}

/// Wraps a recolorer so every update is followed by its invariant check and a properness check.
pub struct Checked<R: Recolorer + ?Sized> {
    pub inner: Box<R>,
    updates: u64,
}

impl<R: Recolorer + ?Sized> Checked<R> {
    pub fn new(inner: Box<R>) -> Self {
        Checked { inner, updates: 0 }
    }
}

fn verify(state: &ColoredGraph) -> Result<(), EngineError> {
    match state.is_proper() {
        Ok(true) => Ok(()),
        Ok(false) => Err(EngineError::InvariantViolation("coloring not proper".into())),
        Err(u) => Err(EngineError::InvariantViolation(format!("vertex {} uncolored", u.0))),
    }
}

impl<R: Recolorer + ?Sized> Recolorer for Checked<R> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn apply(&mut self, op: &UpdateOp) -> Result<u64, EngineError> {
        let k = self.inner.apply(op)?;
        self.updates += 1;
        self.inner.check_invariants()?;
        verify(self.inner.state())?;
        Ok(k)
    }

    fn state(&self) -> &ColoredGraph {
        self.inner.state()
    }

    fn check_invariants(&self) -> Result<(), EngineError> {
        self.inner.check_invariants()
    }

    fn color_budget(&self) -> Option<u64> {
        self.inner.color_budget()
    }

    fn per_update_cap(&self) -> Option<u64> {
        self.inner.per_update_cap()
    }

    fn s(&self) -> Option<u64> {
        self.inner.s()
    }
}

fn amortized_budget(kind: EngineKind, d: u32, m: &Metrics) -> Option<u64> {
    let d = d as u64;
    match kind {
        EngineKind::Small => Some((d + 2) * m.insertion_updates),
        EngineKind::Big => Some((d + 1) * m.s_history.iter().copied().max().unwrap_or(0) * m.insertion_updates),
        _ => None,
    }
}

fn base_report(name: String, d: u32, colorer: &str, input: String, eng: &dyn Recolorer) -> RunReport {
    let m = &eng.state().metrics;
    RunReport {
        schema: RUN_SCHEMA,
        engine: name,
        d,
        colorer: colorer.to_string(),
        input,
        updates: m.updates_applied,
        insertion_updates: m.insertion_updates,
        s_history: m.s_history.clone(),
        s_final: eng.s().unwrap_or(0),
        s_max: m.s_history.iter().copied().max().unwrap_or(0),
        resets: m.resets,
        recolorings_total: m.recolorings_total,
        recolorings_per_update: m.recolorings_per_update.clone(),
        max_per_update: m.max_per_update,
        distinct_colors_now: m.distinct_colors_now,
        distinct_colors_max: m.distinct_colors_max,
        bucket_colors_max: m.bucket_colors_max,
        color_budget_max: None,
        color_budget_violations: 0,
        per_update_cap_max: None,
        per_update_cap_violations: 0,
        amortized_budget: None,
        wall_time: Default::default(),
    }
}

/// Runs one engine over `ops`, starting from `initial`.
pub fn run_ops(
    engine: EngineKind,
    d: u32,
    colorer: StaticColorer,
    initial: DynamicGraph,
    ops: &[UpdateOp],
    checked: bool,
    label: String,
) -> Result<RunReport, HarnessError> {
    let start = Instant::now();
    let mut eng =
        build_engine(engine, d, initial, colorer).map_err(|source| HarnessError::Engine { update: 0, source })?;
    let mut budget_max: Option<u64> = None;
    let mut cap_max: Option<u64> = None;
    let (mut budget_viol, mut cap_viol) = (0u64, 0u64);
    let mut track = |eng: &dyn Recolorer, k: Option<u64>| {
        if let Some(b) = eng.color_budget() {
            budget_max = budget_max.max(Some(b));
            if eng.state().metrics.distinct_colors_now > b {
                budget_viol += 1;
            }
        }
        if let (Some(cap), Some(k)) = (eng.per_update_cap(), k) {
            cap_max = cap_max.max(Some(cap));
            if k > cap {
                cap_viol += 1;
            }
        }
    };
    track(eng.as_ref(), None);
    for (i, op) in ops.iter().enumerate() {
        let update = i as u64 + 1;
        let k = eng.apply(op).map_err(|source| HarnessError::Engine { update, source })?;
        track(eng.as_ref(), Some(k));
        if checked {
            eng.check_invariants().map_err(|source| HarnessError::Engine { update, source })?;
            if !matches!(eng.state().is_proper(), Ok(true)) {
                return Err(HarnessError::Improper { update });
            }
        }
    }
    let mut r = base_report(engine.as_str().to_string(), d, colorer.as_str(), label, eng.as_ref());
    r.color_budget_max = budget_max;
    r.color_budget_violations = budget_viol;
    r.per_update_cap_max = cap_max;
    r.per_update_cap_violations = cap_viol;
    r.amortized_budget = amortized_budget(engine, d, &eng.state().metrics);
    r.wall_time = start.elapsed();
    Ok(r)
}

pub fn run(config: &RunConfig) -> Result<RunReport, HarnessError> {
    if config.d == 0 {
        return Err(HarnessError::Config("d must be at least 1".into()));
    }
    let ops = config.input.load()?;
    run_ops(config.engine, config.d, config.colorer, DynamicGraph::new(), &ops, config.checked, config.input.label())
}

/// One run per distinct `d`, rows sorted by `d`.
pub fn sweep(
    engine: EngineKind,
    colorer: StaticColorer,
    input: &InputSource,
    d_values: &[u32],
) -> Result<SweepReport, HarnessError> {
    if d_values.contains(&0) {
        return Err(HarnessError::Config("d must be at least 1".into()));
    }
    let ops = input.load()?;
    let mut ds = d_values.to_vec();
    ds.sort_unstable();
    ds.dedup();
    let mut rows = Vec::with_capacity(ds.len());
    for d in ds {
        let r = run_ops(engine, d, colorer, DynamicGraph::new(), &ops, false, input.label())?;
        rows.push(SweepRow {
            d,
            s_final: r.s_final,
            s_max: r.s_max,
            colors_max: r.distinct_colors_max,
            recolorings_total: r.recolorings_total,
            max_per_update: r.max_per_update,
            color_budget_max: r.color_budget_max,
            amortized_budget: r.amortized_budget,
        });
    }
    Ok(SweepReport {
        schema: SWEEP_SCHEMA,
        engine: engine.as_str().to_string(),
        colorer: colorer.as_str().to_string(),
        input: input.label(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArenaKind {
    Stars,
    C3,
    General,
}

/// `c=<c>,n=<n>,m=<m>` with optional `kind=stars|c3|general`, `alpha=`, `cycles=`, `resets=`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversarySpec {
    pub c: u64,
    pub n: u64,
    pub m: u64,
    pub kind: Option<ArenaKind>,
    pub alpha: Option<u64>,
    /// Stop the three-color construction after this many cycles.
    pub cycles: Option<usize>,
    /// Stop the general construction after this many resets.
    pub resets: Option<usize>,
}

impl AdversarySpec {
    pub fn new(c: u64, n: u64, m: u64) -> Self {
        AdversarySpec { c, n, m, kind: None, alpha: None, cycles: None, resets: None }
    }

    /// The explicit kind, or stars for `c = 2`, the three-color construction when `n` fits it,
    /// and the general one otherwise.
    pub fn resolved_kind(&self) -> ArenaKind {
        if let Some(k) = self.kind {
            return k;
        }
        match self.c {
            2 if self.n.is_multiple_of(3) && self.n >= 9 => ArenaKind::Stars,
            3 if build_c3_fits(self.n) => ArenaKind::C3,
            _ => ArenaKind::General,
        }
    }
}

fn build_c3_fits(n: u64) -> bool {
    let t = ceil_root(n, 3);
    pow_sat(t, 3) == n && t >= 27 && t.is_multiple_of(9)
}

impl FromStr for AdversarySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (mut c, mut n, mut m) = (None, None, None);
        let mut spec = AdversarySpec::new(0, 0, 0);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| format!("expected key=value, got `{part}`"))?;
            let num = || v.parse::<u64>().map_err(|_| format!("bad number `{v}` for `{k}`"));
            match k {
                "c" => c = Some(num()?),
                "n" => n = Some(num()?),
                "m" => m = Some(num()?),
                "alpha" => spec.alpha = Some(num()?),
                "cycles" => spec.cycles = Some(num()? as usize),
                "resets" => spec.resets = Some(num()? as usize),
                "kind" => {
                    spec.kind = Some(match v {
                        "stars" => ArenaKind::Stars,
                        "c3" => ArenaKind::C3,
                        "general" => ArenaKind::General,
                        _ => return Err(format!("unknown kind `{v}` (stars, c3, general)")),
                    })
                }
                _ => return Err(format!("unknown key `{k}`")),
            }
        }
        spec.c = c.ok_or("missing c=")?;
        spec.n = n.ok_or("missing n=")?;
        spec.m = m.ok_or("missing m=")?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArenaAlgorithm {
    Baseline(BaselineKind),
    Engine { kind: EngineKind, d: u32, colorer: StaticColorer },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArenaConfig {
    pub spec: AdversarySpec,
    pub algorithm: ArenaAlgorithm,
    pub checked: bool,
}

pub struct ArenaResult {
    pub report: ArenaReport,
    pub initial: DynamicGraph,
    pub ops: Vec<UpdateOp>,
}

impl ArenaResult {
    /// The initial graph as `av`/`ae` lines followed by the played updates.
    pub fn replay_text(&self) -> String {
        format_graph(&self.initial) + &format_stream(&self.ops)
    }
}

fn floors(kind: ArenaKind, spec: &AdversarySpec, adv: &dyn Adversary, observed: u64) -> Vec<FloorCheck> {
    let ledger = adv.ledger();
    match kind {
        ArenaKind::Stars => {
            let per = spec.n / 3;
            let required = ledger.links.len() as u64 * per;
            let achieved: u64 = ledger.links.iter().map(|l| l.forced).sum();
            let each = ledger.links.iter().all(|l| l.forced >= per);
            vec![FloorCheck {
                description: format!("{} links force n/3 = {per} each", ledger.links.len()),
                required,
                achieved,
                met: each && achieved >= required,
            }]
        }
        ArenaKind::C3 => {
            let t = ceil_root(spec.n, 3);
            let (links, link_floor, inval) = (t / 6, t / 9, (t * t - 1) / 2);
            ledger
                .cycles
                .iter()
                .enumerate()
                .map(|(i, cy)| match cy.invalidation_cost {
                    Some(cost) => FloorCheck {
                        description: format!("cycle {i}: 1-tree invalidation costs (n^(2/3)-1)/2"),
                        required: inval,
                        achieved: cost,
                        met: cost >= inval,
                    },
                    None => FloorCheck {
                        description: format!("cycle {i}: {links} links force {link_floor} each"),
                        required: links * link_floor,
                        achieved: cy.link_costs.iter().sum(),
                        met: cy.link_costs.len() as u64 == links && cy.link_costs.iter().all(|&x| x >= link_floor),
                    },
                })
                .collect()
        }
        ArenaKind::General => vec![FloorCheck {
            description: "c * observed recolorings cover the charged ones".into(),
            required: ledger.charged_recolorings,
            achieved: spec.c * observed,
            met: ledger.charged_recolorings <= spec.c * observed,
        }],
    }
}

pub fn arena(config: &ArenaConfig) -> Result<ArenaResult, HarnessError> {
    let start = Instant::now();
    let spec = &config.spec;
    let kind = spec.resolved_kind();
    let (initial, mut adv): (DynamicGraph, Box<dyn Adversary>) = match kind {
        ArenaKind::Stars => {
            if spec.c != 2 {
                return Err(HarnessError::Config("the stars construction needs c=2".into()));
            }
            let (g, a) = build_stars_c2(spec.n)?;
            (g, Box::new(a))
        }
        ArenaKind::C3 => {
            if spec.c != 3 {
                return Err(HarnessError::Config("the three-color construction needs c=3".into()));
            }
            let (g, a) = build_c3(spec.n)?;
            let a = match spec.cycles {
                Some(k) => a.with_max_cycles(k),
                None => a,
            };
            (g, Box::new(a))
        }
        ArenaKind::General => {
            let alpha = match spec.alpha {
                Some(a) => a,
                None => GeneralParams::new(spec.c, spec.n)?.alpha,
            };
            let (g, a) = build_general(spec.c, spec.n, alpha)?;
            let a = match spec.resets {
                Some(k) => a.with_max_resets(k),
                None => a,
            };
            (g, Box::new(a))
        }
    };
    let vertices = initial.vertex_count() as u64;
    let (mut alg, d, colorer): (Box<dyn Recolorer>, u32, String) = match &config.algorithm {
        ArenaAlgorithm::Baseline(b) => (
            Box::new(
                Baseline::new(*b, spec.c, initial.clone())
                    .map_err(|source| HarnessError::Engine { update: 0, source })?,
            ),
            0,
            "none".into(),
        ),
        ArenaAlgorithm::Engine { kind, d, colorer } => (
            build_engine(*kind, *d, initial.clone(), *colorer)
                .map_err(|source| HarnessError::Engine { update: 0, source })?,
            *d,
            colorer.as_str().into(),
        ),
    };
    if config.checked {
        alg = Box::new(Checked::new(alg));
    }
    let out = arena_run(adv.as_mut(), alg.as_mut(), spec.m)?;
    let floors = floors(kind, spec, adv.as_ref(), out.observed_recolorings);
    let mut run = base_report(alg.name(), d, &colorer, adv.name(), alg.as_ref());
    run.wall_time = start.elapsed();
    let report = ArenaReport {
        schema: ARENA_SCHEMA,
        adversary: out.adversary.clone(),
        algorithm: out.algorithm.clone(),
        c: spec.c,
        n: spec.n,
        m: spec.m,
        vertices,
        updates: out.updates,
        insertions: out.insertions,
        deletions: out.deletions,
        observed_recolorings: out.observed_recolorings,
        forced_total: out.attributed.iter().sum(),
        attributed: out.attributed,
        floors,
        ledger: out.ledger,
        run,
    };
    Ok(ArenaResult { report, initial, ops: out.ops })
}
