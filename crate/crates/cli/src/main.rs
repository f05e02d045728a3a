//! `dyncolor` command line: run engines on update streams, sweep `d`, play adversary arenas.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dyncolor::adversary::BaselineKind;
use dyncolor::harness::{
    self, AdversarySpec, ArenaAlgorithm, ArenaConfig, HarnessError, InputSource, RunConfig, StreamSpec,
};
use dyncolor::{EngineKind, StaticColorer};

#[derive(Parser)]
#[command(name = "dyncolor", version, about = "Dynamic graph coloring engines and lower-bound arenas")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply one update stream to one engine and write a report.
    Run {
        #[arg(long)]
        engine: EngineKind,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value = "greedy")]
        colorer: StaticColorer,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Check invariants and properness after every update.
        #[arg(long)]
        checked: bool,
    },
    /// Run one engine for several values of d over the same stream.
    Sweep {
        #[arg(long)]
        engine: EngineKind,
        /// Comma-separated values of d.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        d: Vec<u32>,
        #[arg(long, default_value = "greedy")]
        colorer: StaticColorer,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Play a lower-bound construction against a baseline or an engine.
    Arena {
        /// `c=<c>,n=<n>,m=<m>`, optionally `kind=stars|c3|general`, `alpha=`, `cycles=`, `resets=`.
        #[arg(long)]
        adversary: AdversarySpec,
        /// Baseline repair algorithm; used unless --engine is given.
        #[arg(long, default_value = "minimal")]
        baseline: BaselineKind,
        #[arg(long)]
        engine: Option<EngineKind>,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long, default_value = "greedy")]
        colorer: StaticColorer,
        #[command(flatten)]
        out: OutArgs,
        /// Write the initial graph and the played updates in stream format.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[arg(long)]
        checked: bool,
    },
    /// Write a seeded random stream.
    Gen {
        #[command(flatten)]
        input: GenArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    updates: usize,
    #[arg(long, default_value_t = 1000)]
    max_vertices: usize,
    /// Keep the graph a forest.
    #[arg(long)]
    forest: bool,
}

#[derive(Args)]
struct InputArgs {
    /// Stream file; mutually exclusive with --seed.
    #[arg(long, conflicts_with = "seed")]
    input: Option<PathBuf>,
    /// Generate the stream from this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    updates: usize,
    #[arg(long, default_value_t = 1000)]
    max_vertices: usize,
    #[arg(long)]
    forest: bool,
}

impl InputArgs {
    fn source(&self) -> Result<InputSource> {
        match (&self.input, self.seed) {
            (Some(p), None) => Ok(InputSource::Path(p.clone())),
            (None, Some(seed)) => {
                Ok(InputSource::Generated(StreamSpec::new(seed, self.updates, self.max_vertices, self.forest)))
            }
            _ => bail!("give exactly one of --input or --seed"),
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn emit(&self, json: &str, summary: &str) -> Result<()> {
        match &self.out {
            Some(p) => {
                std::fs::write(p, format!("{json}\n")).with_context(|| format!("writing {}", p.display()))?;
                print!("{summary}");
            }
            None => {
                println!("{json}");
                eprint!("{summary}");
            }
        }
        Ok(())
    }
}

fn fail(e: HarnessError) -> anyhow::Error {
    match e.update() {
        Some(u) => anyhow::anyhow!("failing update {u}: {e}"),
        None => anyhow::anyhow!(e),
    }
}

fn main_inner() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { engine, d, colorer, input, out, checked } => {
            let mut cfg = RunConfig::new(engine, d, colorer, input.source()?);
            cfg.checked = checked;
            let r = harness::run(&cfg).map_err(fail)?;
            out.emit(&r.to_json(), &r.summary())?;
            if r.color_budget_violations + r.per_update_cap_violations > 0 {
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Sweep { engine, d, colorer, input, out } => {
            let r = harness::sweep(engine, colorer, &input.source()?, &d).map_err(fail)?;
            out.emit(&r.to_json(), &r.summary())?;
        }
        Cmd::Arena { adversary, baseline, engine, d, colorer, out, dump, checked } => {
            let algorithm = match engine {
                Some(kind) => ArenaAlgorithm::Engine { kind, d, colorer },
                None => ArenaAlgorithm::Baseline(baseline),
            };
            let res = harness::arena(&ArenaConfig { spec: adversary, algorithm, checked }).map_err(fail)?;
            if let Some(p) = dump {
                std::fs::write(&p, res.replay_text()).with_context(|| format!("writing {}", p.display()))?;
            }
            out.emit(&res.report.to_json(), &res.report.summary())?;
            if !res.report.floors_met() {
                return Ok(ExitCode::from(3));
            }
        }
        Cmd::Gen { input, out } => {
            let spec = StreamSpec::new(input.seed, input.updates, input.max_vertices, input.forest);
            let text = harness::format_stream(&harness::generate(&spec));
            match out {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
