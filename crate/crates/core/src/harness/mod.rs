//! Stream parsing, random streams, engine runs, sweeps and arenas, with serialized reports.

pub mod gen;
pub mod report;
pub mod run;
pub mod stream;

pub use gen::{generate, Mix, StreamSpec};
pub use report::{ArenaReport, FloorCheck, RunReport, SweepReport, SweepRow};
pub use run::{
    arena, run, run_ops, sweep, AdversarySpec, ArenaAlgorithm, ArenaConfig, ArenaKind, ArenaResult, Checked,
    HarnessError, InputSource, RunConfig,
};
pub use stream::{format_stream, parse_stream, read_stream, StreamError};
