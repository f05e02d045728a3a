//! Simple undirected dynamic graph and the update vocabulary.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Caller-supplied vertex identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

/// One update of a fully dynamic graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateOp {
    InsertVertex(VertexId, Vec<VertexId>),
    DeleteVertex(VertexId),
    InsertEdge(VertexId, VertexId),
    DeleteEdge(VertexId, VertexId),
}

impl UpdateOp {
    pub fn insert_vertex(id: u64, nbrs: &[u64]) -> Self {
        UpdateOp::InsertVertex(VertexId(id), nbrs.iter().map(|&v| VertexId(v)).collect())
    }

    pub fn insert_edge(u: u64, v: u64) -> Self {
        UpdateOp::InsertEdge(VertexId(u), VertexId(v))
    }

    pub fn delete_edge(u: u64, v: u64) -> Self {
        UpdateOp::DeleteEdge(VertexId(u), VertexId(v))
    }

    pub fn delete_vertex(id: u64) -> Self {
        UpdateOp::DeleteVertex(VertexId(id))
    }

    pub fn is_insertion(&self) -> bool {
        matches!(self, UpdateOp::InsertVertex(..) | UpdateOp::InsertEdge(..))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertex {0} already present")]
    DuplicateVertex(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge {0}-{1} already present")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge {0}-{1} not present")]
    MissingEdge(VertexId, VertexId),
}

/// Adjacency-list graph with set semantics on neighbors.
#[derive(Clone, Debug, Default)]
pub struct DynamicGraph {
    adj: FxHashMap<VertexId, Vec<VertexId>>,
    edges: usize,
}

impl DynamicGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph on `vertices` with the given edges. Panics on malformed input; meant for fixtures.
    pub fn from_edges(vertices: impl IntoIterator<Item = u64>, edges: &[(u64, u64)]) -> Self {
        let mut g = Self::new();
        for v in vertices {
            g.apply(&UpdateOp::insert_vertex(v, &[])).expect("fixture vertex");
        }
        for &(u, v) in edges {
            g.apply(&UpdateOp::insert_edge(u, v)).expect("fixture edge");
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adj.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        match (self.adj.get(&u), self.adj.get(&v)) {
            (Some(a), Some(b)) => {
                let (short, other) = if a.len() <= b.len() { (a, v) } else { (b, u) };
                short.contains(&other)
            }
            _ => false,
        }
    }

    /// Unordered iteration over live vertices.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    pub fn sorted_vertices(&self) -> Vec<VertexId> {
        let mut v: Vec<_> = self.vertices().collect();
        v.sort_unstable();
        v
    }

    /// Every edge once, as `(min, max)`, unordered.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj.iter().flat_map(|(&u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn sorted_edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut e: Vec<_> = self.edges().collect();
        e.sort_unstable();
        e
    }

    /// Checks `op` against the current graph without mutating it.
    pub fn validate(&self, op: &UpdateOp) -> Result<(), GraphError> {
        match op {
            UpdateOp::InsertVertex(v, nbrs) => {
                if self.contains(*v) {
                    return Err(GraphError::DuplicateVertex(*v));
                }
                let mut seen = FxHashSet::default();
                for &u in nbrs {
                    if u == *v {
                        return Err(GraphError::SelfLoop(u));
                    }
                    if !self.contains(u) {
                        return Err(GraphError::UnknownVertex(u));
                    }
                    if !seen.insert(u) {
                        return Err(GraphError::DuplicateEdge(*v, u));
                    }
                }
                Ok(())
            }
            UpdateOp::DeleteVertex(v) => {
                if self.contains(*v) {
                    Ok(())
                } else {
                    Err(GraphError::UnknownVertex(*v))
                }
            }
            UpdateOp::InsertEdge(u, v) => {
                if u == v {
                    return Err(GraphError::SelfLoop(*u));
                }
                self.require(*u)?;
                self.require(*v)?;
                if self.has_edge(*u, *v) {
                    return Err(GraphError::DuplicateEdge(*u, *v));
                }
                Ok(())
            }
            UpdateOp::DeleteEdge(u, v) => {
                self.require(*u)?;
                self.require(*v)?;
                if !self.has_edge(*u, *v) {
                    return Err(GraphError::MissingEdge(*u, *v));
                }
                Ok(())
            }
        }
    }

    fn require(&self, v: VertexId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    /// Applies `op` atomically: on error the graph is untouched.
    pub fn apply(&mut self, op: &UpdateOp) -> Result<(), GraphError> {
        self.validate(op)?;
        match op {
            UpdateOp::InsertVertex(v, nbrs) => {
                self.adj.insert(*v, nbrs.clone());
                for &u in nbrs {
                    self.adj.get_mut(&u).expect("validated").push(*v);
                }
                self.edges += nbrs.len();
            }
            UpdateOp::DeleteVertex(v) => {
                let nbrs = self.adj.remove(v).expect("validated");
                for u in &nbrs {
                    let list = self.adj.get_mut(u).expect("symmetric");
                    let pos = list.iter().position(|x| x == v).expect("symmetric");
                    list.swap_remove(pos);
                }
                self.edges -= nbrs.len();
            }
            UpdateOp::InsertEdge(u, v) => {
                self.adj.get_mut(u).expect("validated").push(*v);
                self.adj.get_mut(v).expect("validated").push(*u);
                self.edges += 1;
            }
            UpdateOp::DeleteEdge(u, v) => {
                for (a, b) in [(u, v), (v, u)] {
                    let list = self.adj.get_mut(a).expect("validated");
                    let pos = list.iter().position(|x| x == b).expect("validated");
                    list.swap_remove(pos);
                }
                self.edges -= 1;
            }
        }
        Ok(())
    }

    /// Vertices of the connected component containing `start`, in BFS order.
    pub fn component(&self, start: VertexId) -> Vec<VertexId> {
        let mut seen = FxHashSet::default();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        seen.insert(start);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in self.neighbors(u) {
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// True when `u` and `v` lie in the same connected component.
    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        if u == v {
            return true;
        }
        let mut seen = FxHashSet::default();
        let mut queue = VecDeque::from([u]);
        seen.insert(u);
        while let Some(x) = queue.pop_front() {
            for &w in self.neighbors(x) {
                if w == v {
                    return true;
                }
                if seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Maximum degree inside the subgraph induced by `subset`.
    pub fn max_induced_degree(&self, subset: &BTreeSet<VertexId>) -> usize {
        subset.iter().map(|&v| self.neighbors(v).iter().filter(|w| subset.contains(w)).count()).max().unwrap_or(0)
    }

    /// Structural self-check: symmetry, no loops, no parallel edges, edge count.
    pub fn check_structure(&self) -> Result<(), String> {
        let mut half = 0usize;
        for (&u, ns) in &self.adj {
            let mut seen = FxHashSet::default();
            for &v in ns {
                if v == u {
                    return Err(format!("self-loop on {u}"));
                }
                if !seen.insert(v) {
                    return Err(format!("parallel edge {u}-{v}"));
                }
                if !self.adj.get(&v).is_some_and(|b| b.contains(&u)) {
                    return Err(format!("asymmetric edge {u}-{v}"));
                }
            }
            half += ns.len();
        }
        if half != 2 * self.edges {
            return Err(format!("edge count {} vs adjacency {}", self.edges, half / 2));
        }
        Ok(())
    }
}
