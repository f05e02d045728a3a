//! Line format for update streams: `av <id> <nbr>*`, `rv <id>`, `ae <u> <v>`, `re <u> <v>`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::graph::{DynamicGraph, GraphError, UpdateOp, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error at line {line}: {source}")]
    Validation { line: usize, source: GraphError },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

impl StreamError {
    pub fn line(&self) -> Option<usize> {
        match self {
            StreamError::Parse { line, .. } | StreamError::Validation { line, .. } => Some(*line),
            StreamError::Io { .. } => None,
        }
    }
}

fn parse_id(tok: &str, line: usize) -> Result<VertexId, StreamError> {
    tok.parse::<u64>().map(VertexId).map_err(|_| StreamError::Parse { line, msg: format!("bad vertex id `{tok}`") })
}

/// Parses one line; `Ok(None)` for blank lines and comments.
pub fn parse_line(text: &str, line: usize) -> Result<Option<UpdateOp>, StreamError> {
    let body = text.split('#').next().unwrap_or("");
    let mut toks = body.split_whitespace();
    let Some(cmd) = toks.next() else {
        return Ok(None);
    };
    let args = toks.map(|t| parse_id(t, line)).collect::<Result<Vec<_>, _>>()?;
    let arity = |want: usize| {
        if args.len() == want {
            Ok(())
        } else {
            Err(StreamError::Parse { line, msg: format!("`{cmd}` takes {want} ids, got {}", args.len()) })
        }
    };
    let self_loop = |v: VertexId| StreamError::Parse { line, msg: GraphError::SelfLoop(v).to_string() };
    let op = match cmd {
        "av" => {
            let Some((&id, nbrs)) = args.split_first() else {
                return Err(StreamError::Parse { line, msg: "`av` needs an id".into() });
            };
            if nbrs.contains(&id) {
                return Err(self_loop(id));
            }
            let uniq: BTreeSet<_> = nbrs.iter().collect();
            if uniq.len() != nbrs.len() {
                return Err(StreamError::Parse { line, msg: format!("repeated neighbor of {id}") });
            }
            UpdateOp::InsertVertex(id, nbrs.to_vec())
        }
        "rv" => {
            arity(1)?;
            UpdateOp::DeleteVertex(args[0])
        }
        "ae" | "re" => {
            arity(2)?;
            if args[0] == args[1] {
                return Err(self_loop(args[0]));
            }
            if cmd == "ae" {
                UpdateOp::InsertEdge(args[0], args[1])
            } else {
                UpdateOp::DeleteEdge(args[0], args[1])
            }
        }
        other => return Err(StreamError::Parse { line, msg: format!("unknown command `{other}`") }),
    };
    Ok(Some(op))
}

/// Syntax only. Each op carries its 1-based line number.
pub fn parse_ops(text: &str) -> Result<Vec<(usize, UpdateOp)>, StreamError> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        if let Some(op) = parse_line(l, i + 1)? {
            out.push((i + 1, op));
        }
    }
    Ok(out)
}

/// Parses and validates against `initial`, applying each op to a scratch copy.
pub fn parse_stream_from(text: &str, initial: &DynamicGraph) -> Result<Vec<UpdateOp>, StreamError> {
    let mut g = initial.clone();
    let ops = parse_ops(text)?;
    let mut out = Vec::with_capacity(ops.len());
    for (line, op) in ops {
        g.apply(&op).map_err(|source| StreamError::Validation { line, source })?;
        out.push(op);
    }
    Ok(out)
}

/// Parses and validates a stream that starts from the empty graph.
pub fn parse_stream(text: &str) -> Result<Vec<UpdateOp>, StreamError> {
    parse_stream_from(text, &DynamicGraph::new())
}

pub fn read_stream(path: &Path) -> Result<Vec<UpdateOp>, StreamError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| StreamError::Io { path: path.display().to_string(), msg: e.to_string() })?;
    parse_stream(&text)
}

pub fn format_op(op: &UpdateOp) -> String {
    match op {
        UpdateOp::InsertVertex(v, nbrs) => {
            let mut s = format!("av {v}");
            for u in nbrs {
                let _ = write!(s, " {u}");
            }
            s
        }
        UpdateOp::DeleteVertex(v) => format!("rv {v}"),
        UpdateOp::InsertEdge(u, v) => format!("ae {u} {v}"),
        UpdateOp::DeleteEdge(u, v) => format!("re {u} {v}"),
    }
}

pub fn format_stream(ops: &[UpdateOp]) -> String {
    let mut s = String::new();
    for op in ops {
        s.push_str(&format_op(op));
        s.push('\n');
    }
    s
}

/// `av` lines for every vertex of `g` followed by `ae` lines for its edges, ascending.
pub fn format_graph(g: &DynamicGraph) -> String {
    let mut s = String::new();
    for v in g.sorted_vertices() {
        let _ = writeln!(s, "av {v}");
    }
    for (u, v) in g.sorted_edges() {
        let _ = writeln!(s, "ae {u} {v}");
    }
    s
}
