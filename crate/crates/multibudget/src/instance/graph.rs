use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected multigraph. Edges are listed in element-id order; endpoints
/// are normalized so `u <= v`. Parallel edges are permitted, self-loops are
/// not.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraphSpec", into = "RawGraphSpec")]
pub struct GraphSpec {
    n: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawGraphSpec {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraphSpec> for GraphSpec {
    type Error = Error;
    fn try_from(raw: RawGraphSpec) -> Result<Self> {
        GraphSpec::new(raw.n, raw.edges)
    }
}

impl From<GraphSpec> for RawGraphSpec {
    fn from(g: GraphSpec) -> Self {
        RawGraphSpec {
            n: g.n,
            edges: g.edges,
        }
    }
}

impl std::fmt::Debug for GraphSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GraphSpec(n={}, edges={:?})", self.n, self.edges)
    }
}

impl GraphSpec {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at node {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        Ok(GraphSpec {
            n,
            edges: normalized,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> Result<(usize, usize)> {
        self.edges.get(e).copied().ok_or(Error::ElementOutOfRange {
            id: e,
            universe: self.edges.len(),
        })
    }

    /// Edge ids incident to each node.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            inc[u].push(e);
            inc[v].push(e);
        }
        inc
    }

    pub fn is_matching<I: IntoIterator<Item = usize>>(&self, edges: I) -> Result<bool> {
        let mut used = vec![false; self.n];
        for e in edges {
            let (u, v) = self.endpoints(e)?;
            if used[u] || used[v] {
                return Ok(false);
            }
            used[u] = true;
            used[v] = true;
        }
        Ok(true)
    }

    pub fn is_perfect_matching(&self, edges: &BTreeSet<usize>) -> Result<bool> {
        Ok(self.is_matching(edges.iter().copied())? && 2 * edges.len() == self.n)
    }

    pub fn is_forest<I: IntoIterator<Item = usize>>(&self, edges: I) -> Result<bool> {
        let mut uf = UnionFind::new(self.n);
        for e in edges {
            let (u, v) = self.endpoints(e)?;
            if !uf.union(u, v) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Size of a maximum spanning forest inside `edges` (the graphic-matroid
    /// rank of the edge set).
    pub fn forest_rank<I: IntoIterator<Item = usize>>(&self, edges: I) -> Result<usize> {
        let mut uf = UnionFind::new(self.n);
        let mut merges = 0;
        for e in edges {
            let (u, v) = self.endpoints(e)?;
            if uf.union(u, v) {
                merges += 1;
            }
        }
        Ok(merges)
    }

    pub fn is_spanning_tree(&self, edges: &BTreeSet<usize>) -> Result<bool> {
        if self.n == 0 {
            return Ok(edges.is_empty());
        }
        Ok(edges.len() == self.n - 1 && self.forest_rank(edges.iter().copied())? == self.n - 1)
    }

    /// True when `edges` forms a simple path from `s` to `t`.
    pub fn is_path(&self, edges: &BTreeSet<usize>, s: usize, t: usize) -> Result<bool> {
        if s >= self.n || t >= self.n || s == t {
            return Ok(false);
        }
        if edges.is_empty() {
            return Ok(false);
        }
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for &e in edges {
            let (u, v) = self.endpoints(e)?;
            incident[u].push(e);
            incident[v].push(e);
        }
        if incident[s].len() != 1 || incident[t].len() != 1 {
            return Ok(false);
        }
        // walk from s; every edge must be consumed exactly once, no revisits
        let mut visited_nodes = BTreeSet::new();
        let mut used = BTreeSet::new();
        let mut node = s;
        visited_nodes.insert(s);
        loop {
            let next_edge = incident[node]
                .iter()
                .copied()
                .find(|e| !used.contains(e));
            let Some(e) = next_edge else { break };
            used.insert(e);
            let (u, v) = self.endpoints(e)?;
            node = if u == node { v } else { u };
            if !visited_nodes.insert(node) {
                return Ok(false);
            }
            if node == t {
                break;
            }
        }
        Ok(node == t && used.len() == edges.len())
    }
}

/// Union-find with path compression; enough for desk-scale graphs.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when the two components were distinct.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}
