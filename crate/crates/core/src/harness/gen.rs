//! Seeded random update streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::graph::{DynamicGraph, UpdateOp, VertexId};

/// Relative weights of the four update kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mix {
    pub insert_vertex: u32,
    pub delete_vertex: u32,
    pub insert_edge: u32,
    pub delete_edge: u32,
}

impl Default for Mix {
    fn default() -> Self {
        Mix { insert_vertex: 35, delete_vertex: 15, insert_edge: 35, delete_edge: 15 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub seed: u64,
    pub updates: usize,
    pub max_vertices: usize,
    /// Keep the graph acyclic, so it stays 2-colorable.
    pub forest: bool,
    pub mix: Mix,
}

impl StreamSpec {
    pub fn new(seed: u64, updates: usize, max_vertices: usize, forest: bool) -> Self {
        StreamSpec { seed, updates, max_vertices, forest, mix: Mix::default() }
    }
}

struct Pool<T: Copy + Eq + std::hash::Hash> {
    items: Vec<T>,
    pos: FxHashMap<T, usize>,
}

impl<T: Copy + Eq + std::hash::Hash> Pool<T> {
    fn new() -> Self {
        Pool { items: Vec::new(), pos: FxHashMap::default() }
    }

    fn insert(&mut self, x: T) {
        self.pos.insert(x, self.items.len());
        self.items.push(x);
    }

    fn remove(&mut self, x: T) {
        if let Some(i) = self.pos.remove(&x) {
            self.items.swap_remove(i);
            if i < self.items.len() {
                self.pos.insert(self.items[i], i);
            }
        }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> Option<T> {
        (!self.items.is_empty()).then(|| self.items[rng.random_range(0..self.items.len())])
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

struct Gen {
    rng: ChaCha8Rng,
    g: DynamicGraph,
    live: Pool<VertexId>,
    edges: Pool<(VertexId, VertexId)>,
    next_id: u64,
    spec: StreamSpec,
}

impl Gen {
    fn insert_vertex(&mut self) -> Option<UpdateOp> {
        if self.live.len() >= self.spec.max_vertices.max(1) {
            return None;
        }
        let want = self.rng.random_range(0..=3usize).min(self.live.len());
        let mut nbrs: Vec<VertexId> = Vec::new();
        for _ in 0..want * 3 {
            if nbrs.len() == want {
                break;
            }
            let u = self.live.pick(&mut self.rng)?;
            if nbrs.contains(&u) {
                continue;
            }
            if self.spec.forest && nbrs.iter().any(|&w| self.g.connected(u, w)) {
                continue;
            }
            nbrs.push(u);
        }
        let v = VertexId(self.next_id);
        self.next_id += 1;
        Some(UpdateOp::InsertVertex(v, nbrs))
    }

    fn insert_edge(&mut self) -> Option<UpdateOp> {
        if self.live.len() < 2 {
            return None;
        }
        if !self.spec.forest && self.edges.len() >= 2 * self.live.len() {
            return None;
        }
        for _ in 0..8 {
            let u = self.live.pick(&mut self.rng)?;
            let v = self.live.pick(&mut self.rng)?;
            if u == v || self.g.has_edge(u, v) {
                continue;
            }
            if self.spec.forest && self.g.connected(u, v) {
                continue;
            }
            return Some(UpdateOp::InsertEdge(u, v));
        }
        None
    }

    fn step(&mut self) -> UpdateOp {
        let m = self.spec.mix;
        let total = (m.insert_vertex + m.delete_vertex + m.insert_edge + m.delete_edge).max(1);
        loop {
            let r = self.rng.random_range(0..total);
            let op = if r < m.insert_vertex {
                self.insert_vertex()
            } else if r < m.insert_vertex + m.delete_vertex {
                self.live.pick(&mut self.rng).map(UpdateOp::DeleteVertex)
            } else if r < m.insert_vertex + m.delete_vertex + m.insert_edge {
                self.insert_edge()
            } else {
                self.edges.pick(&mut self.rng).map(|(u, v)| UpdateOp::DeleteEdge(u, v))
            };
            if let Some(op) = op {
                return op;
            }
            if self.live.len() == 0 {
                return self.insert_vertex().expect("room for a vertex");
            }
        }
    }

    fn commit(&mut self, op: &UpdateOp) {
        match op {
            UpdateOp::InsertVertex(v, nbrs) => {
                self.live.insert(*v);
                for &u in nbrs {
                    self.edges.insert(key(*v, u));
                }
            }
            UpdateOp::DeleteVertex(v) => {
                for &u in self.g.neighbors(*v) {
                    self.edges.remove(key(*v, u));
                }
                self.live.remove(*v);
            }
            UpdateOp::InsertEdge(u, v) => self.edges.insert(key(*u, *v)),
            UpdateOp::DeleteEdge(u, v) => self.edges.remove(key(*u, *v)),
        }
        self.g.apply(op).expect("generator emits valid ops");
    }
}

/// Deterministic in `spec`; every op is valid against the graph built by its predecessors.
pub fn generate(spec: &StreamSpec) -> Vec<UpdateOp> {
    let mut gen = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        g: DynamicGraph::new(),
        live: Pool::new(),
        edges: Pool::new(),
        next_id: 0,
        spec: spec.clone(),
    };
    let mut out = Vec::with_capacity(spec.updates);
    while out.len() < spec.updates {
        let op = gen.step();
        gen.commit(&op);
        out.push(op);
    }
    out
}

/// `n` isolated vertex insertions: fills every level and forces resets.
pub fn vertex_fill(n: u64) -> Vec<UpdateOp> {
    (0..n).map(|v| UpdateOp::InsertVertex(VertexId(v), Vec::new())).collect()
}

/// `n` vertices, each attached to a uniformly random earlier vertex.
pub fn growing_forest(n: u64, seed: u64) -> Vec<UpdateOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|v| {
            let nbrs = if v == 0 { Vec::new() } else { vec![VertexId(rng.random_range(0..v))] };
            UpdateOp::InsertVertex(VertexId(v), nbrs)
        })
        .collect()
}

/// `n` isolated vertices, then `4n` attempts at random links between distinct components.
/// Links land on equal colors often.
pub fn conflict_forest(n: u64, seed: u64) -> Vec<UpdateOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = vertex_fill(n);
    let mut g = DynamicGraph::from_edges(0..n, &[]);
    for _ in 0..4 * n {
        let u = VertexId(rng.random_range(0..n));
        let v = VertexId(rng.random_range(0..n));
        if u == v || g.connected(u, v) {
            continue;
        }
        let op = UpdateOp::InsertEdge(u, v);
        g.apply(&op).expect("acyclic insert");
        ops.push(op);
    }
    ops
}
