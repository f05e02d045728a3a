//! Two colors: three stars, repeatedly linking two roots of equal color and cutting the link.

use std::collections::BTreeSet;

use super::arena::{Adversary, AdversaryError, ChargeLedger, LinkRecord};
use crate::graph::{DynamicGraph, UpdateOp, VertexId};
use crate::ledger::{ColorChange, ColoredGraph};

#[derive(Clone, Debug)]
pub struct StarsAdversary {
    n: u64,
    roots: [VertexId; 3],
    pending_cut: Option<(VertexId, VertexId)>,
    updates: u64,
    ledger: ChargeLedger,
}

/// Three stars of `n / 3` vertices each; star `k` has root `k * n / 3`.
pub fn build_stars_c2(n: u64) -> Result<(DynamicGraph, StarsAdversary), AdversaryError> {
    if n < 9 || !n.is_multiple_of(3) {
        return Err(AdversaryError::Precondition(format!("n = {n} must be a multiple of 3 and at least 9")));
    }
    let k = n / 3;
    let mut edges = Vec::new();
    for star in 0..3 {
        let root = star * k;
        edges.extend((1..k).map(|j| (root + j, root)));
    }
    let g = DynamicGraph::from_edges(0..n, &edges);
    let roots = [VertexId(0), VertexId(k), VertexId(2 * k)];
    Ok((g, StarsAdversary { n, roots, pending_cut: None, updates: 0, ledger: ChargeLedger::default() }))
}

impl StarsAdversary {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn roots(&self) -> [VertexId; 3] {
        self.roots
    }
}

impl Adversary for StarsAdversary {
    fn name(&self) -> String {
        format!("stars-c2(n={})", self.n)
    }

    fn c(&self) -> u64 {
        2
    }

    fn next_op(&mut self, view: &ColoredGraph) -> Result<Option<UpdateOp>, AdversaryError> {
        if let Some((u, v)) = self.pending_cut.take() {
            return Ok(Some(UpdateOp::DeleteEdge(u, v)));
        }
        let used: BTreeSet<_> = view.ledger.colors().values().collect();
        if used.len() > 2 {
            return Err(AdversaryError::NotTwoColored(used.len()));
        }
        let r = self.roots;
        let pair = [(0, 1), (0, 2), (1, 2)]
            .into_iter()
            .find(|&(a, b)| view.color(r[a]) == view.color(r[b]))
            .ok_or_else(|| AdversaryError::Audit("three roots with pairwise distinct colors".into()))?;
        Ok(Some(UpdateOp::InsertEdge(r[pair.0], r[pair.1])))
    }

    fn observe(
        &mut self,
        op: &UpdateOp,
        _view: &ColoredGraph,
        _changes: &[ColorChange],
        forced: u64,
    ) -> Result<(), AdversaryError> {
        self.updates += 1;
        if let UpdateOp::InsertEdge(u, v) = op {
            self.pending_cut = Some((*u, *v));
            self.ledger.links.push(LinkRecord { update: self.updates, forced });
        }
        Ok(())
    }

    fn ledger(&self) -> &ChargeLedger {
        &self.ledger
    }
}
